//! Orthonormal bases and measurement setups.
//!
//! The minimal setup consists of `d` bases
//!
//! ```text
//! psi_k^(l) = (1/sqrt d) sum_j exp(alpha pi i (l-1) j^2) w^{jk} phi_j,   l = 1..d
//! ```
//!
//! each unbiased with respect to the reference basis `phi_j`. Basis `l = 1` is
//! the plain Fourier basis. For irrational `alpha` the projections of these bases
//! together with the reference projections span all Hermitian operators.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoherenceError, Result};
use crate::linalg::ComplexMatrix;

/// Default irrational phase parameter.
pub const DEFAULT_ALPHA: f64 = SQRT_2;

/// The golden ratio, an alternative phase parameter with well spread exponents.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Tolerance on `|<psi_j|psi_k> - delta_jk|` when accepting a basis.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

type Vector = Vec<Complex64>;

/// An ordered list of `d` orthonormal vectors in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<Vector>,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<Vector>) -> Result<Self> {
        let d = vectors.len();
        if d == 0 {
            return Err(CoherenceError::Empty("basis"));
        }
        for v in &vectors {
            if v.len() != d {
                return Err(CoherenceError::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(CoherenceError::NonFinite);
            }
        }
        let basis = OrthonormalBasis { vectors };
        let deviation = basis.orthonormality_deviation();
        if deviation >= ORTHONORMALITY_TOL {
            return Err(CoherenceError::NotOrthonormal { deviation });
        }
        Ok(basis)
    }

    /// The computational basis `|0>, .., |d-1>`.
    pub fn standard(d: usize) -> Self {
        let vectors = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        OrthonormalBasis { vectors }
    }

    /// Columns of a matrix as basis vectors.
    pub fn from_columns(m: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(m.column_iter().map(|c| c.iter().cloned().collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k]
    }

    /// `max_{j,k} |<psi_j|psi_k> - delta_jk|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev = 0.0f64;
        for j in 0..d {
            for k in 0..d {
                let ip = inner(&self.vectors[j], &self.vectors[k]);
                let target = if j == k { 1.0 } else { 0.0 };
                dev = dev.max((ip - target).norm());
            }
        }
        dev
    }

    /// Rank-one projections `|psi_k><psi_k|`.
    pub fn projections(&self) -> Vec<ComplexMatrix> {
        self.vectors.iter().map(|v| ComplexMatrix::projector(v)).collect()
    }

    /// Matrix whose columns are the basis vectors.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, k| self.vectors[k][i])
    }
}

/// `<a|b>`, antilinear in the first argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl Serialize for OrthonormalBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthonormalBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let vectors = raw
            .into_iter()
            .map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        OrthonormalBasis::new(vectors).map_err(serde::de::Error::custom)
    }
}

/// A reference basis and `m >= 1` measured bases of a common dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetupRepr", into = "SetupRepr")]
pub struct MeasurementSetup {
    reference: OrthonormalBasis,
    measured: Vec<OrthonormalBasis>,
    alpha: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SetupRepr {
    dim: usize,
    alpha: Option<f64>,
    reference: OrthonormalBasis,
    measured: Vec<OrthonormalBasis>,
}

impl TryFrom<SetupRepr> for MeasurementSetup {
    type Error = CoherenceError;

    fn try_from(r: SetupRepr) -> Result<Self> {
        if r.reference.dim() != r.dim {
            return Err(CoherenceError::DimensionMismatch {
                expected: r.dim,
                found: r.reference.dim(),
            });
        }
        let mut setup = MeasurementSetup::new(r.reference, r.measured)?;
        setup.alpha = r.alpha;
        Ok(setup)
    }
}

impl From<MeasurementSetup> for SetupRepr {
    fn from(s: MeasurementSetup) -> Self {
        SetupRepr {
            dim: s.dim(),
            alpha: s.alpha,
            reference: s.reference,
            measured: s.measured,
        }
    }
}

impl MeasurementSetup {
    pub fn new(reference: OrthonormalBasis, measured: Vec<OrthonormalBasis>) -> Result<Self> {
        if measured.is_empty() {
            return Err(CoherenceError::Empty("measured bases"));
        }
        let d = reference.dim();
        if let Some(b) = measured.iter().find(|b| b.dim() != d) {
            return Err(CoherenceError::DimensionMismatch {
                expected: d,
                found: b.dim(),
            });
        }
        Ok(MeasurementSetup {
            reference,
            measured,
            alpha: None,
        })
    }

    /// Setup measured in the given bases, with the standard basis as reference.
    pub fn with_standard_reference(measured: Vec<OrthonormalBasis>) -> Result<Self> {
        let d = measured
            .first()
            .ok_or(CoherenceError::Empty("measured bases"))?
            .dim();
        Self::new(OrthonormalBasis::standard(d), measured)
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn reference(&self) -> &OrthonormalBasis {
        &self.reference
    }

    pub fn measured(&self) -> &[OrthonormalBasis] {
        &self.measured
    }

    pub fn num_measured(&self) -> usize {
        self.measured.len()
    }

    /// Phase parameter used to build the setup, when it came from [`build_minimal_setup`].
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// Projections of all measured bases, basis by basis.
    pub fn measured_projections(&self) -> Vec<ComplexMatrix> {
        self.measured.iter().flat_map(|b| b.projections()).collect()
    }

    /// A copy with basis `index` removed. Fails if it is the only one.
    pub fn without_basis(&self, index: usize) -> Result<Self> {
        let measured: Vec<_> = self
            .measured
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != index)
            .map(|(_, b)| b.clone())
            .collect();
        let mut s = Self::new(self.reference.clone(), measured)?;
        s.alpha = self.alpha;
        Ok(s)
    }

    /// A copy with one more measured basis appended.
    pub fn with_basis(&self, basis: OrthonormalBasis) -> Result<Self> {
        let mut measured = self.measured.clone();
        measured.push(basis);
        Self::new(self.reference.clone(), measured)
    }
}

/// Parameters of the minimal setup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetupConfig {
    dim: usize,
    alpha: f64,
}

impl SetupConfig {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        if dim < 2 {
            return Err(CoherenceError::InvalidParameter(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(CoherenceError::InvalidParameter(format!(
                "alpha must be finite and nonzero, got {alpha}"
            )));
        }
        Ok(SetupConfig { dim, alpha })
    }

    pub fn with_default_alpha(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_ALPHA)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// `exp(alpha pi i n)` with the integer exponent kept exact until the end.
pub fn quadratic_phase(alpha: f64, n: i64) -> Complex64 {
    let turns = (alpha * n as f64).rem_euclid(2.0);
    Complex64::from_polar(1.0, PI * turns)
}

/// `psi_k = (1/sqrt d) sum_j beta_j w^{jk} phi_j`, unbiased to `reference`
/// for any unit-modulus `beta`.
pub fn mub_from_phases(reference: &OrthonormalBasis, betas: &[Complex64]) -> Result<OrthonormalBasis> {
    let d = reference.dim();
    if betas.len() != d {
        return Err(CoherenceError::DimensionMismatch {
            expected: d,
            found: betas.len(),
        });
    }
    for (index, b) in betas.iter().enumerate() {
        let modulus = b.norm();
        if (modulus - 1.0).abs() > 1e-12 {
            return Err(CoherenceError::NonUnitPhase { index, modulus });
        }
    }
    let scale = 1.0 / (d as f64).sqrt();
    let twiddles: Vec<Complex64> = (0..d)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / d as f64))
        .collect();
    let vectors = (0..d)
        .map(|k| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            for (j, phi) in reference.vectors().iter().enumerate() {
                let coef = betas[j] * twiddles[(j * k) % d] * scale;
                for (vi, pi) in v.iter_mut().zip(phi) {
                    *vi += coef * pi;
                }
            }
            v
        })
        .collect();
    OrthonormalBasis::new(vectors)
}

/// The `d` bases of the minimal setup, with the standard basis as reference.
pub fn build_minimal_setup(config: &SetupConfig) -> Result<MeasurementSetup> {
    let d = config.dim();
    let reference = OrthonormalBasis::standard(d);
    let measured = (1..=d)
        .map(|l| {
            let betas: Vec<Complex64> = (0..d)
                .map(|j| quadratic_phase(config.alpha(), ((l - 1) * j * j) as i64))
                .collect();
            mub_from_phases(&reference, &betas)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut setup = MeasurementSetup::new(reference, measured)?;
    setup.alpha = Some(config.alpha());
    Ok(setup)
}

/// `max_{j,k} | |<a_j|b_k>| - 1/sqrt d |`.
pub fn unbiasedness_deviation(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<f64> {
    let d = a.dim();
    if b.dim() != d {
        return Err(CoherenceError::DimensionMismatch {
            expected: d,
            found: b.dim(),
        });
    }
    let target = 1.0 / (d as f64).sqrt();
    let mut dev = 0.0f64;
    for u in a.vectors() {
        for v in b.vectors() {
            dev = dev.max((inner(u, v).norm() - target).abs());
        }
    }
    Ok(dev)
}

/// True iff every overlap modulus is within `tol` of `1/sqrt d`.
pub fn check_mutual_unbiasedness(a: &OrthonormalBasis, b: &OrthonormalBasis, tol: f64) -> Result<bool> {
    Ok(unbiasedness_deviation(a, b)? < tol)
}

/// Eigenbasis of `n . sigma` for a unit Bloch vector, `+1` eigenvector first.
///
/// Each vector is phased so its first non-negligible component is real and positive.
pub fn qubit_bloch_basis(n: [f64; 3]) -> Result<OrthonormalBasis> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(CoherenceError::InvalidParameter(format!(
            "Bloch vector must have unit length, got {norm}"
        )));
    }
    let [x, y, z] = n;
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let plus = vec![Complex64::new(c, 0.0), Complex64::from_polar(s, phi)];
    let minus = vec![Complex64::new(s, 0.0), -Complex64::from_polar(c, phi)];
    OrthonormalBasis::new(vec![fix_phase(plus), fix_phase(minus)])
}

fn fix_phase(v: Vector) -> Vector {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(lead) => {
            let rot = lead.conj() / lead.norm();
            v.into_iter().map(|z| z * rot).collect()
        }
        None => v,
    }
}

/// Applies a unitary to every vector of a basis.
pub fn rotate_basis(basis: &OrthonormalBasis, unitary: &ComplexMatrix) -> Result<OrthonormalBasis> {
    let d = basis.dim();
    let ud = unitary.dim()?;
    if ud != d {
        return Err(CoherenceError::DimensionMismatch {
            expected: d,
            found: ud,
        });
    }
    let u = unitary.as_matrix();
    let vectors = basis
        .vectors()
        .iter()
        .map(|v| (0..d).map(|i| (0..d).map(|j| u[(i, j)] * v[j]).sum()).collect())
        .collect();
    OrthonormalBasis::new(vectors)
}
