//! Which perturbations a measurement setup can see.
//!
//! A traceless Hermitian `delta` is undetected by a setup when
//! `tr(|psi_k><psi_k| delta) = 0` for every measured projection. A setup
//! certifies coherence exactly when all undetected perturbations are diagonal in
//! the reference basis; the same condition lets every off-diagonal element be
//! written as a linear combination of outcome probabilities.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoherenceError, Result};
use crate::linalg::{
    a_minus, a_plus, coordinate_rows, least_squares_min_norm, null_space_in_traceless_hermitian,
    real_span_dimension, ComplexMatrix, HermitianBasisVector,
};
use crate::reconstruction::ProbabilityTable;
use crate::setups::{check_mutual_unbiasedness, MeasurementSetup};
use crate::states::{DensityMatrix, PerturbationOperator};

/// Outcome of a detection analysis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectionReport {
    pub dim: usize,
    pub num_measured: usize,
    pub includes_reference: bool,
    pub undetected_dim: usize,
    pub undetected_basis: Vec<PerturbationOperator>,
    /// True when every undetected perturbation is diagonal, i.e. the setup
    /// certifies coherence (and thereby determines it, and decides thresholds).
    pub all_undetected_diagonal: bool,
    /// Largest off-diagonal modulus among the HS-normalized undetected basis.
    pub max_offdiag_leak: f64,
    /// Dimension of the span of the measured projections.
    pub span_dim: usize,
    pub info_complete_with_reference: bool,
}

fn constraint_ops(setup: &MeasurementSetup, include_reference: bool) -> Vec<ComplexMatrix> {
    let mut ops = setup.measured_projections();
    if include_reference {
        ops.extend(setup.reference().projections());
    }
    ops
}

/// HS-orthonormal basis of the perturbations no measured basis can see.
pub fn undetected_perturbations(setup: &MeasurementSetup, tol: f64) -> Result<Vec<PerturbationOperator>> {
    null_space_in_traceless_hermitian(&setup.measured_projections(), tol)
}

/// Full detection analysis of the measured bases.
pub fn certifies_coherence(setup: &MeasurementSetup, tol: f64) -> Result<DetectionReport> {
    certifies_coherence_with(setup, false, tol)
}

/// As [`certifies_coherence`], optionally treating the reference basis as measured too.
pub fn certifies_coherence_with(
    setup: &MeasurementSetup,
    include_reference: bool,
    tol: f64,
) -> Result<DetectionReport> {
    let d = setup.dim();
    let ops = constraint_ops(setup, include_reference);
    let undetected = null_space_in_traceless_hermitian(&ops, tol)?;
    let max_offdiag_leak = undetected
        .iter()
        .map(|p| p.matrix().max_offdiag_abs())
        .fold(0.0, f64::max);
    let span_dim = real_span_dimension(&ops, tol)?;
    let mut all_ops = setup.measured_projections();
    all_ops.extend(setup.reference().projections());
    let info_complete_with_reference = real_span_dimension(&all_ops, tol)? == d * d;
    Ok(DetectionReport {
        dim: d,
        num_measured: setup.num_measured(),
        includes_reference: include_reference,
        undetected_dim: undetected.len(),
        all_undetected_diagonal: max_offdiag_leak < tol,
        undetected_basis: undetected,
        max_offdiag_leak,
        span_dim,
        info_complete_with_reference,
    })
}

/// The two conditions characterizing certifying setups of exactly `d` bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalSetupConditions {
    /// Every measured basis is mutually unbiased to the reference.
    pub unbiased_all: bool,
    /// Reference and measured projections span all `d^2` Hermitian directions.
    pub info_complete: bool,
}

impl MinimalSetupConditions {
    pub fn both(self) -> bool {
        self.unbiased_all && self.info_complete
    }
}

pub fn check_minimal_setup_conditions(setup: &MeasurementSetup, tol: f64) -> Result<MinimalSetupConditions> {
    let d = setup.dim();
    if setup.num_measured() != d {
        return Err(CoherenceError::BasisCount {
            expected: d,
            found: setup.num_measured(),
        });
    }
    let mut unbiased_all = true;
    for b in setup.measured() {
        unbiased_all &= check_mutual_unbiasedness(setup.reference(), b, tol)?;
    }
    let mut ops = setup.reference().projections();
    ops.extend(setup.measured_projections());
    let info_complete = real_span_dimension(&ops, tol)? == d * d;
    Ok(MinimalSetupConditions {
        unbiased_all,
        info_complete,
    })
}

/// A coherent qubit state with the same `sigma_a` and `sigma_b` statistics as `I/2`.
///
/// The state is `(I + c . sigma)/2` with `c = a x b / |a x b|`. Fails when `a`
/// and `b` are parallel, or when both are orthogonal to the z axis (then `c` is
/// along z and the state is incoherent).
pub fn qubit_undetectable_state(a: [f64; 3], b: [f64; 3]) -> Result<DensityMatrix> {
    for v in [a, b] {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !n.is_finite() || (n - 1.0).abs() > 1e-10 {
            return Err(CoherenceError::InvalidParameter(format!(
                "Bloch vectors must have unit length, got {n}"
            )));
        }
    }
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let norm = cross.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(CoherenceError::DegenerateQubitPair("vectors are parallel"));
    }
    if a[2].abs() < 1e-12 && b[2].abs() < 1e-12 {
        return Err(CoherenceError::DegenerateQubitPair(
            "both vectors are orthogonal to z; this pair certifies coherence",
        ));
    }
    DensityMatrix::from_bloch([cross[0] / norm, cross[1] / norm, cross[2] / norm])
}

/// Weights expressing `A+_{jk}` and `A-_{jk}` through measured projections.
///
/// `plus[l][k']` multiplies the projection on outcome `k'` of basis `l`.
#[derive(Clone, Debug)]
pub struct OffDiagonalExpansion {
    pub j: usize,
    pub k: usize,
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
    /// HS norm of `sum c P - A+_{jk}`.
    pub residual_plus: f64,
    pub residual_minus: f64,
}

impl OffDiagonalExpansion {
    /// `rho_jk = tr(rho A+) + i tr(rho A-)` from outcome probabilities.
    pub fn estimate(&self, table: &ProbabilityTable) -> Result<Complex64> {
        if table.num_bases() != self.plus.len() || table.dim() != self.plus[0].len() {
            return Err(CoherenceError::DimensionMismatch {
                expected: self.plus.len() * self.plus[0].len(),
                found: table.num_bases() * table.dim(),
            });
        }
        let dot = |w: &[Vec<f64>]| -> f64 {
            w.iter()
                .zip(table.rows())
                .map(|(wr, pr)| wr.iter().zip(pr).map(|(a, b)| a * b).sum::<f64>())
                .sum()
        };
        Ok(Complex64::new(dot(&self.plus), dot(&self.minus)))
    }
}

struct ProjectionSystem {
    d: usize,
    m: usize,
    /// `d^2 x (m d)`, one column per measured projection.
    columns: DMatrix<f64>,
}

impl ProjectionSystem {
    fn new(setup: &MeasurementSetup) -> Result<Self> {
        let (d, rows) = coordinate_rows(&setup.measured_projections())?;
        Ok(ProjectionSystem {
            d,
            m: setup.num_measured(),
            columns: rows.transpose(),
        })
    }

    fn expand(&self, pairs: &[(usize, usize)], tol: f64) -> Result<Vec<OffDiagonalExpansion>> {
        let d = self.d;
        let n = d * d;
        let mut targets = DMatrix::zeros(n, 2 * pairs.len());
        for (p, &(j, k)) in pairs.iter().enumerate() {
            if j >= k || k >= d {
                return Err(CoherenceError::InvalidParameter(format!(
                    "need j < k < {d}, got ({j}, {k})"
                )));
            }
            for (slot, op) in [(2 * p, a_plus(d, j, k)), (2 * p + 1, a_minus(d, j, k))] {
                let v = HermitianBasisVector::from_matrix(&op)?;
                for (i, x) in v.coords().iter().enumerate() {
                    targets[(i, slot)] = *x;
                }
            }
        }
        let weights = least_squares_min_norm(&self.columns, &targets, tol);
        let residuals = &self.columns * &weights - &targets;
        let reshape = |col: usize| -> Vec<Vec<f64>> {
            (0..self.m)
                .map(|l| (0..d).map(|k| weights[(l * d + k, col)]).collect())
                .collect()
        };
        let mut out = Vec::with_capacity(pairs.len());
        for (p, &(j, k)) in pairs.iter().enumerate() {
            let residual_plus = residuals.column(2 * p).norm();
            let residual_minus = residuals.column(2 * p + 1).norm();
            let worst = residual_plus.max(residual_minus);
            if worst > tol {
                return Err(CoherenceError::NotCertifying(format!(
                    "A(+/-)_{{{j}{k}}} is not in the span of the measured projections (residual {worst:e})"
                )));
            }
            out.push(OffDiagonalExpansion {
                j,
                k,
                plus: reshape(2 * p),
                minus: reshape(2 * p + 1),
                residual_plus,
                residual_minus,
            });
        }
        Ok(out)
    }
}

/// Minimum-norm least-squares weights writing `A+_{jk}`, `A-_{jk}` in the
/// span of the measured projections. Errors if the residual exceeds `tol`.
pub fn offdiagonal_expansion_coeffs(
    setup: &MeasurementSetup,
    j: usize,
    k: usize,
    tol: f64,
) -> Result<OffDiagonalExpansion> {
    let sys = ProjectionSystem::new(setup)?;
    Ok(sys.expand(&[(j, k)], tol)?.remove(0))
}

/// Linear estimator of all off-diagonal elements for an arbitrary certifying setup.
#[derive(Clone, Debug)]
pub struct OffDiagonalEstimator {
    dim: usize,
    expansions: Vec<OffDiagonalExpansion>,
}

impl OffDiagonalEstimator {
    pub fn new(setup: &MeasurementSetup, tol: f64) -> Result<Self> {
        let sys = ProjectionSystem::new(setup)?;
        let d = sys.d;
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|j| ((j + 1)..d).map(move |k| (j, k))).collect();
        Ok(OffDiagonalEstimator {
            dim: d,
            expansions: sys.expand(&pairs, tol)?,
        })
    }

    pub fn expansions(&self) -> &[OffDiagonalExpansion] {
        &self.expansions
    }

    pub fn max_residual(&self) -> f64 {
        self.expansions
            .iter()
            .map(|e| e.residual_plus.max(e.residual_minus))
            .fold(0.0, f64::max)
    }

    /// Off-diagonal part of the state that produced `table`; diagonal left zero.
    pub fn estimate(&self, table: &ProbabilityTable) -> Result<ComplexMatrix> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for e in &self.expansions {
            let z = e.estimate(table)?;
            m[(e.j, e.k)] = z;
            m[(e.k, e.j)] = z.conj();
        }
        ComplexMatrix::new(m)
    }
}
