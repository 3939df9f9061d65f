//! Density matrices, perturbation operators and the l1-norm of coherence.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CoherenceError, Result};
use crate::linalg::{ComplexMatrix, HERMITIAN_TOL};

/// Slack on trace and smallest eigenvalue when validating states.
pub const STATE_TOL: f64 = 1e-10;

/// A `d x d` Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaggedMatrix", into = "TaggedMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

/// A traceless Hermitian `d x d` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaggedMatrix", into = "TaggedMatrix")]
pub struct PerturbationOperator {
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct TaggedMatrix {
    kind: String,
    #[serde(flatten)]
    matrix: ComplexMatrix,
}

impl TryFrom<TaggedMatrix> for DensityMatrix {
    type Error = CoherenceError;

    fn try_from(t: TaggedMatrix) -> Result<Self> {
        if t.kind != "density" {
            return Err(CoherenceError::InvalidParameter(format!(
                "expected kind \"density\", found \"{}\"",
                t.kind
            )));
        }
        DensityMatrix::new(t.matrix)
    }
}

impl From<DensityMatrix> for TaggedMatrix {
    fn from(rho: DensityMatrix) -> Self {
        TaggedMatrix {
            kind: "density".into(),
            matrix: rho.matrix,
        }
    }
}

impl TryFrom<TaggedMatrix> for PerturbationOperator {
    type Error = CoherenceError;

    fn try_from(t: TaggedMatrix) -> Result<Self> {
        if t.kind != "perturbation" {
            return Err(CoherenceError::InvalidParameter(format!(
                "expected kind \"perturbation\", found \"{}\"",
                t.kind
            )));
        }
        PerturbationOperator::new(t.matrix)
    }
}

impl From<PerturbationOperator> for TaggedMatrix {
    fn from(p: PerturbationOperator) -> Self {
        TaggedMatrix {
            kind: "perturbation".into(),
            matrix: p.matrix,
        }
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (with [`STATE_TOL`] slack).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let matrix = matrix.to_hermitian(HERMITIAN_TOL)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(CoherenceError::BadTrace { trace, expected: 1.0 });
        }
        let min_eigenvalue = matrix.hermitian_eigenvalues()?[0];
        if min_eigenvalue < -STATE_TOL {
            return Err(CoherenceError::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { matrix })
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Diagonal (incoherent) state from a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probs))
    }

    /// `|psi><psi|` for a normalized `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(CoherenceError::InvalidParameter("zero state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector(&v))
    }

    /// Qubit state `(I + c . sigma)/2` for a Bloch vector with `|c| <= 1`.
    pub fn from_bloch(c: [f64; 3]) -> Result<Self> {
        let m = ComplexMatrix::identity(2).add(&bloch_operator(c))?.scale(0.5);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues().expect("validated Hermitian")[0]
    }

    /// `tr(rho a)` for a Hermitian observable.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<f64> {
        crate::linalg::hs_inner(&self.matrix, a)
    }

    /// `<v|rho|v>`.
    pub fn born_probability(&self, v: &[Complex64]) -> f64 {
        let m = self.matrix.as_matrix();
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..d {
                row += m[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }
}

impl PerturbationOperator {
    /// Validates Hermiticity and zero trace.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let matrix = matrix.to_hermitian(HERMITIAN_TOL)?;
        let trace = matrix.trace().re;
        if trace.abs() > STATE_TOL {
            return Err(CoherenceError::BadTrace { trace, expected: 0.0 });
        }
        Ok(PerturbationOperator { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        PerturbationOperator { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Real symmetric part `A` in `delta = A + iB`.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.matrix.as_matrix().map(|z| z.re)
    }

    /// Real antisymmetric part `B` in `delta = A + iB`.
    pub fn imag_part(&self) -> DMatrix<f64> {
        self.matrix.as_matrix().map(|z| z.im)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.matrix.max_offdiag_abs() < tol
    }
}

/// Phases `phi_0 .. phi_{d-1}`, each reduced into `[0, 2 pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(CoherenceError::Empty("phase vector"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(CoherenceError::NonFinite);
        }
        Ok(PhaseVector(
            phases.into_iter().map(|p| p.rem_euclid(2.0 * PI)).collect(),
        ))
    }

    pub fn zeros(d: usize) -> Self {
        PhaseVector(vec![0.0; d])
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        PhaseVector((0..d).map(|_| rng.random_range(0.0..2.0 * PI)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `(1/sqrt d) sum_k e^{i phi_k} |k>`.
    pub fn max_coherent_vector(&self) -> Vec<Complex64> {
        let s = 1.0 / (self.dim() as f64).sqrt();
        self.0.iter().map(|&p| Complex64::from_polar(s, p)).collect()
    }
}

/// `C1(rho) = sum_{j != k} |rho_jk|`.
pub fn c1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let m = rho.matrix.as_matrix();
    let mut acc = 0.0;
    for j in 0..d {
        for k in 0..d {
            if j != k {
                acc += m[(j, k)].norm();
            }
        }
    }
    acc
}

/// True iff every off-diagonal entry has modulus below `tol`.
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    rho.matrix.max_offdiag_abs() < tol
}

fn check_mixing(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(CoherenceError::InvalidParameter(format!(
            "mixing parameter r must lie in (0, 1), got {r}"
        )));
    }
    Ok(())
}

/// `(1 - r) I/d + r |psi_phi><psi_phi|`, a full-rank state with `C1 = r (d - 1)`.
pub fn noisy_max_coherent_state(phases: &PhaseVector, r: f64) -> Result<DensityMatrix> {
    check_mixing(r)?;
    let d = phases.dim();
    let psi = phases.max_coherent_vector();
    let m = DMatrix::from_fn(d, d, |i, j| {
        let mixed = if i == j { (1.0 - r) / d as f64 } else { 0.0 };
        Complex64::new(mixed, 0.0) + psi[i] * psi[j].conj() * r
    });
    DensityMatrix::new(ComplexMatrix::new(m)?)
}

/// A step size `delta_max > 0` such that `rho + delta * op` stays positive for
/// all `|delta| <= delta_max`, using the bound `lambda_min(rho) / ||op||`.
pub fn perturbation_scale_bound(rho: &DensityMatrix, delta_op: &PerturbationOperator) -> Result<f64> {
    if rho.dim() != delta_op.dim() {
        return Err(CoherenceError::DimensionMismatch {
            expected: rho.dim(),
            found: delta_op.dim(),
        });
    }
    let min_eigenvalue = rho.min_eigenvalue();
    if min_eigenvalue <= 1e-14 {
        return Err(CoherenceError::SingularState { min_eigenvalue });
    }
    let norm = delta_op.matrix.operator_norm();
    if norm == 0.0 {
        return Err(CoherenceError::ZeroPerturbation);
    }
    Ok(min_eigenvalue / norm)
}

/// Derivative at `delta = 0` of `delta -> C1(rho_phi^r + (delta r / d) op)`:
///
/// ```text
/// g(phi) = (2r/d) sum_{p>q} [A_pq cos(phi_p - phi_q) + B_pq sin(phi_p - phi_q)]
/// ```
pub fn coherence_derivative(phases: &PhaseVector, delta_op: &PerturbationOperator, r: f64) -> Result<f64> {
    check_mixing(r)?;
    let d = phases.dim();
    if delta_op.dim() != d {
        return Err(CoherenceError::DimensionMismatch {
            expected: d,
            found: delta_op.dim(),
        });
    }
    let phi = phases.as_slice();
    let m = delta_op.matrix.as_matrix();
    let mut acc = 0.0;
    for p in 0..d {
        for q in 0..p {
            let theta = phi[p] - phi[q];
            acc += m[(p, q)].re * theta.cos() + m[(p, q)].im * theta.sin();
        }
    }
    Ok(2.0 * r / d as f64 * acc)
}

/// `n . sigma` for a real 3-vector.
pub fn bloch_operator(n: [f64; 3]) -> ComplexMatrix {
    let [x, y, z] = n;
    ComplexMatrix::new_unchecked(DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(-z, 0.0),
        ],
    ))
}

pub fn pauli_x() -> ComplexMatrix {
    bloch_operator([1.0, 0.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    bloch_operator([0.0, 1.0, 0.0])
}

pub fn pauli_z() -> ComplexMatrix {
    bloch_operator([0.0, 0.0, 1.0])
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random full-rank state `G G^dagger / tr(G G^dagger)` with complex Gaussian `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(ComplexMatrix::new_unchecked(w.unscale(tr)))
        .expect("Ginibre construction is a valid state")
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, 1, rng);
    let v: Vec<Complex64> = g.iter().cloned().collect();
    DensityMatrix::pure(&v).expect("nonzero Gaussian vector")
}

/// Random traceless Hermitian operator, normalized to unit operator norm.
pub fn random_perturbation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PerturbationOperator {
    let g = ginibre(d, d, rng);
    let mut h = (&g + g.adjoint()).unscale(2.0);
    let shift = h.trace() / d as f64;
    for i in 0..d {
        h[(i, i)] -= shift;
    }
    let h = ComplexMatrix::new_unchecked(h);
    let norm = h.operator_norm();
    PerturbationOperator::new(h.scale(1.0 / norm)).expect("traceless by construction")
}
