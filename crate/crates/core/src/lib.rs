//! Minimal measurement setups for certifying and quantifying quantum coherence.
//!
//! Coherence is defined relative to a reference basis: a state is incoherent
//! when its density matrix is diagonal there. The crate builds `d` orthonormal
//! bases, each mutually unbiased to the reference, whose outcome statistics
//! detect every perturbation with off-diagonal weight. From those statistics
//! alone it reconstructs every off-diagonal element and therefore the
//! l1-norm of coherence.
//!
//! Modules:
//! - [`linalg`]: complex matrices, Hilbert-Schmidt geometry, rank and null spaces
//! - [`states`]: density matrices, perturbation operators, `C1`
//! - [`setups`]: orthonormal bases and the minimal setup
//! - [`detection`]: undetected perturbations and certification verdicts
//! - [`reconstruction`]: Vandermonde-based recovery of off-diagonal elements
//! - [`number_theory`]: `Z_d` arithmetic and the exponent-injectivity check
//! - [`cli`]: the `coherence-kit` command

pub mod cli;
pub mod detection;
pub mod error;
pub mod linalg;
pub mod number_theory;
pub mod reconstruction;
pub mod setups;
pub mod states;

pub use error::{CoherenceError, Result};
