//! Off-diagonal reconstruction from the minimal setup's outcome probabilities.
//!
//! For basis `l` and shift `z != 0`,
//!
//! ```text
//! sum_k w^{-kz} p^(l)(k) = sum_h x_h^(l-1) rho_{h, h+z},   x_h = exp(alpha pi i [s(h+z)^2 - s(h)^2])
//! ```
//!
//! so each shift gives a `d x d` Vandermonde system in the unknowns
//! `rho_{h, h+z}`. The nodes are distinct because the integer exponents are.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoherenceError, Result};
use crate::linalg::{condition_number, dft_vector, ComplexMatrix};
use crate::number_theory::exponents_for_shift;
use crate::setups::{quadratic_phase, MeasurementSetup, OrthonormalBasis, SetupConfig};
use crate::states::DensityMatrix;

/// Tolerance on row sums of a probability table.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Largest accepted mismatch between `rho_jk` and `conj(rho_kj)` before the
/// table is declared inconsistent with the configuration.
pub const HERMITICITY_MISMATCH_TOL: f64 = 1e-6;

/// Outcome probabilities `p^(l)(k)`, one row per measured basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct ProbabilityTable {
    dim: usize,
    probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    dim: usize,
    probs: Vec<Vec<f64>>,
}

impl TryFrom<TableRepr> for ProbabilityTable {
    type Error = CoherenceError;

    fn try_from(r: TableRepr) -> Result<Self> {
        ProbabilityTable::new(r.dim, r.probs)
    }
}

impl From<ProbabilityTable> for TableRepr {
    fn from(t: ProbabilityTable) -> Self {
        TableRepr {
            dim: t.dim,
            probs: t.probs,
        }
    }
}

impl ProbabilityTable {
    pub fn new(dim: usize, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(CoherenceError::Empty("probability table"));
        }
        for (l, row) in probs.iter().enumerate() {
            if row.len() != dim {
                return Err(CoherenceError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row
                .iter()
                .any(|p| !p.is_finite() || *p < -1e-12 || *p > 1.0 + 1e-12)
            {
                return Err(CoherenceError::InvalidProbabilities(format!(
                    "row {l} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(CoherenceError::InvalidProbabilities(format!(
                    "row {l} sums to {sum}"
                )));
            }
        }
        Ok(ProbabilityTable { dim, probs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_bases(&self) -> usize {
        self.probs.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// `lambda self + (1 - lambda) other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim != other.dim || self.num_bases() != other.num_bases() {
            return Err(CoherenceError::DimensionMismatch {
                expected: self.dim * self.num_bases(),
                found: other.dim * other.num_bases(),
            });
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                    .collect()
            })
            .collect();
        Self::new(self.dim, probs)
    }
}

/// Born probabilities `<psi_k|rho|psi_k>` for each of the given bases.
pub fn simulate_bases(rho: &DensityMatrix, bases: &[OrthonormalBasis]) -> Result<ProbabilityTable> {
    let d = rho.dim();
    let probs = bases
        .iter()
        .map(|b| {
            if b.dim() != d {
                return Err(CoherenceError::DimensionMismatch {
                    expected: d,
                    found: b.dim(),
                });
            }
            Ok(b.vectors().iter().map(|v| rho.born_probability(v)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    ProbabilityTable::new(d, probs)
}

/// Noise-free outcome probabilities of every measured basis of `setup`.
pub fn simulate_probabilities(rho: &DensityMatrix, setup: &MeasurementSetup) -> Result<ProbabilityTable> {
    simulate_bases(rho, setup.measured())
}

/// Outcome probabilities of the reference basis, i.e. the diagonal of `rho`.
pub fn simulate_reference(rho: &DensityMatrix, setup: &MeasurementSetup) -> Result<ProbabilityTable> {
    simulate_bases(rho, std::slice::from_ref(setup.reference()))
}

/// `sum_k w^{-kz} p^(l)(k)` for every basis `l`.
pub fn fourier_profile(table: &ProbabilityTable, z: usize) -> Result<Vec<Complex64>> {
    let d = table.dim();
    if z == 0 {
        return Err(CoherenceError::ZeroShift);
    }
    if z >= d {
        return Err(CoherenceError::InvalidParameter(format!(
            "shift must lie in 1..{d}, got {z}"
        )));
    }
    table
        .rows()
        .iter()
        .map(|row| {
            let values: Vec<Complex64> = row.iter().map(|&p| Complex64::new(p, 0.0)).collect();
            Ok(dft_vector(&values, -1)?[z])
        })
        .collect()
}

/// Vandermonde system `V_{j,h} = x_h^j` for one shift.
#[derive(Clone, Debug)]
pub struct VandermondeSystem {
    shift: Option<usize>,
    alpha: Option<f64>,
    exponents: Option<Vec<i64>>,
    nodes: Vec<Complex64>,
}

impl VandermondeSystem {
    /// Nodes `x_h = exp(alpha pi i [s(h+z)^2 - s(h)^2])` of the minimal setup.
    pub fn for_shift(config: &SetupConfig, z: usize) -> Result<Self> {
        let d = config.dim();
        if z == 0 {
            return Err(CoherenceError::ZeroShift);
        }
        if z >= d {
            return Err(CoherenceError::InvalidParameter(format!(
                "shift must lie in 1..{d}, got {z}"
            )));
        }
        let exponents = exponents_for_shift(d, z);
        let nodes = exponents
            .iter()
            .map(|&n| quadratic_phase(config.alpha(), n))
            .collect();
        Ok(VandermondeSystem {
            shift: Some(z),
            alpha: Some(config.alpha()),
            exponents: Some(exponents),
            nodes,
        })
    }

    /// A system on arbitrary unit-modulus nodes.
    pub fn from_nodes(nodes: Vec<Complex64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(CoherenceError::Empty("Vandermonde nodes"));
        }
        for (index, x) in nodes.iter().enumerate() {
            let modulus = x.norm();
            if (modulus - 1.0).abs() > 1e-12 {
                return Err(CoherenceError::NonUnitPhase { index, modulus });
            }
        }
        Ok(VandermondeSystem {
            shift: None,
            alpha: None,
            exponents: None,
            nodes,
        })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn shift(&self) -> Option<usize> {
        self.shift
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn min_node_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                m = m.min((a - b).norm());
            }
        }
        m
    }

    fn check_distinct(&self) -> Result<()> {
        let min_distance = self.min_node_distance();
        if min_distance <= 1e-12 {
            return Err(CoherenceError::CoincidentNodes { min_distance });
        }
        Ok(())
    }

    /// `V_{j,h} = x_h^j`; powers of exact exponents are taken exactly.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        match (&self.exponents, self.alpha) {
            (Some(e), Some(alpha)) => DMatrix::from_fn(d, d, |j, h| quadratic_phase(alpha, j as i64 * e[h])),
            _ => DMatrix::from_fn(d, d, |j, h| self.nodes[h].powu(j as u32)),
        }
    }

    pub fn condition_number(&self) -> f64 {
        condition_number(&self.matrix())
    }

    /// Closed-form inverse through elementary symmetric polynomials:
    ///
    /// ```text
    /// (V^-1)_{h,j} = (-1)^{d-1-j} e_{d-1-j}(x_i : i != h) / prod_{i != h} (x_h - x_i)
    /// ```
    ///
    /// Row `h` holds the monomial coefficients of the Lagrange polynomial that is
    /// one at `x_h` and zero at the other nodes.
    pub fn inverse_explicit(&self) -> Result<DMatrix<Complex64>> {
        self.check_distinct()?;
        let d = self.dim();
        let mut w = DMatrix::zeros(d, d);
        for h in 0..d {
            let others: Vec<Complex64> = (0..d).filter(|&i| i != h).map(|i| self.nodes[i]).collect();
            let sigma = elementary_symmetric(&others);
            let denom: Complex64 = others.iter().map(|xi| self.nodes[h] - xi).product();
            for j in 0..d {
                let order = d - 1 - j;
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                w[(h, j)] = sigma[order] * sign / denom;
            }
        }
        Ok(w)
    }

    /// Inverse by LU factorization.
    pub fn inverse_dense(&self) -> Result<DMatrix<Complex64>> {
        self.check_distinct()?;
        self.matrix()
            .lu()
            .try_inverse()
            .ok_or(CoherenceError::CoincidentNodes {
                min_distance: self.min_node_distance(),
            })
    }

    pub fn inverse(&self, method: InversionMethod) -> Result<DMatrix<Complex64>> {
        match method {
            InversionMethod::Dense => self.inverse_dense(),
            InversionMethod::Explicit => self.inverse_explicit(),
        }
    }
}

/// `e_0 .. e_n` of the given values (`e_0 = 1`), by expanding `prod (1 + x_i t)`.
pub fn elementary_symmetric(values: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); values.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (n, x) in values.iter().enumerate() {
        for i in (1..=n + 1).rev() {
            let prev = e[i - 1];
            e[i] += x * prev;
        }
    }
    e
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InversionMethod {
    #[default]
    Dense,
    Explicit,
}

/// Reconstructed off-diagonal part, plus diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reconstruction {
    #[serde(flatten)]
    pub matrix: ComplexMatrix,
    /// Whether the diagonal came from reference-basis data (else it is zero).
    pub diagonal_filled: bool,
    /// `max |rho_jk - conj(rho_kj)|` before symmetrization.
    pub hermiticity_mismatch: f64,
    /// Vandermonde condition number per shift `z = 1 .. d-1`.
    pub condition_numbers: Vec<f64>,
    /// Estimated per-entry error.
    pub entry_error: f64,
}

impl Reconstruction {
    /// `sum_{j != k} |rho_jk|` of the reconstructed matrix.
    pub fn c1(&self) -> f64 {
        let m = &self.matrix;
        let d = m.rows();
        let mut acc = 0.0;
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    acc += m.get(j, k).norm();
                }
            }
        }
        acc
    }
}

/// Recovers every `rho_jk`, `j != k`, from the minimal setup's table.
pub fn reconstruct_offdiagonals(table: &ProbabilityTable, config: &SetupConfig) -> Result<Reconstruction> {
    reconstruct_with(table, config, InversionMethod::Dense, None)
}

/// As [`reconstruct_offdiagonals`], choosing the inversion path and optionally
/// filling the diagonal from a one-row reference-basis table.
pub fn reconstruct_with(
    table: &ProbabilityTable,
    config: &SetupConfig,
    method: InversionMethod,
    reference: Option<&ProbabilityTable>,
) -> Result<Reconstruction> {
    let d = config.dim();
    if table.dim() != d {
        return Err(CoherenceError::DimensionMismatch {
            expected: d,
            found: table.dim(),
        });
    }
    if table.num_bases() != d {
        return Err(CoherenceError::BasisCount {
            expected: d,
            found: table.num_bases(),
        });
    }
    let mut raw = DMatrix::<Complex64>::zeros(d, d);
    let mut condition_numbers = Vec::with_capacity(d - 1);
    for z in 1..d {
        let system = VandermondeSystem::for_shift(config, z)?;
        let w = system.inverse(method)?;
        let profile = DVector::from_vec(fourier_profile(table, z)?);
        let y = w * profile;
        for h in 0..d {
            raw[(h, (h + z) % d)] = y[h];
        }
        condition_numbers.push(system.condition_number());
    }

    let mut hermiticity_mismatch = 0.0f64;
    let mut sym = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        for k in (j + 1)..d {
            let a = raw[(j, k)];
            let b = raw[(k, j)].conj();
            hermiticity_mismatch = hermiticity_mismatch.max((a - b).norm());
            let avg = (a + b) * 0.5;
            sym[(j, k)] = avg;
            sym[(k, j)] = avg.conj();
        }
    }
    if hermiticity_mismatch > HERMITICITY_MISMATCH_TOL {
        return Err(CoherenceError::ConfigMismatch {
            mismatch: hermiticity_mismatch,
        });
    }

    let diagonal_filled = match reference {
        Some(r) => {
            if r.dim() != d || r.num_bases() != 1 {
                return Err(CoherenceError::InvalidProbabilities(
                    "reference table must have one row of length d".into(),
                ));
            }
            for (i, p) in r.rows()[0].iter().enumerate() {
                sym[(i, i)] = Complex64::new(*p, 0.0);
            }
            true
        }
        None => false,
    };

    let kappa = condition_numbers.iter().cloned().fold(1.0, f64::max);
    let entry_error = hermiticity_mismatch.max(kappa * d as f64 * f64::EPSILON);
    Ok(Reconstruction {
        matrix: ComplexMatrix::new(sym)?,
        diagonal_filled,
        hermiticity_mismatch,
        condition_numbers,
        entry_error,
    })
}

/// C1 value and an error bound derived from the reconstruction diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceEstimate {
    pub value: f64,
    pub error_bound: f64,
}

pub fn estimate_coherence(table: &ProbabilityTable, config: &SetupConfig) -> Result<CoherenceEstimate> {
    let rec = reconstruct_offdiagonals(table, config)?;
    let d = config.dim() as f64;
    Ok(CoherenceEstimate {
        value: rec.c1(),
        error_bound: d * (d - 1.0) * rec.entry_error,
    })
}

/// `C1` of the measured state, computed from the probability table alone.
pub fn coherence_from_data(table: &ProbabilityTable, config: &SetupConfig) -> Result<f64> {
    Ok(estimate_coherence(table, config)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Above,
    Below,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Above => "above",
            Verdict::Below => "below",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Compares the data's `C1` with `r (d - 1)`. Within `margin` of the threshold
/// the answer is inconclusive; `None` uses ten times the estimated error.
pub fn threshold_verdict(
    table: &ProbabilityTable,
    config: &SetupConfig,
    r: f64,
    margin: Option<f64>,
) -> Result<Verdict> {
    if !(r > 0.0 && r < 1.0) {
        return Err(CoherenceError::InvalidParameter(format!(
            "threshold r must lie in (0, 1), got {r}"
        )));
    }
    let est = estimate_coherence(table, config)?;
    let margin = margin.unwrap_or(10.0 * est.error_bound);
    let threshold = r * (config.dim() as f64 - 1.0);
    Ok(if est.value > threshold + margin {
        Verdict::Above
    } else if est.value < threshold - margin {
        Verdict::Below
    } else {
        Verdict::Inconclusive
    })
}
