//! Complex matrices, Hilbert-Schmidt geometry on Hermitian operators, and
//! tolerance-aware rank / null-space computations.
//!
//! Hermitian `d x d` operators form a real vector space of dimension `d^2`.
//! [`HermitianBasisVector`] fixes coordinates in the orthonormal basis
//!
//! ```text
//! |i><i|,   (|j><k| + |k><j|)/sqrt2,   i(|j><k| - |k><j|)/sqrt2     (j < k)
//! ```
//!
//! so the map `Hermitian -> R^{d^2}` is an isometry for the Hilbert-Schmidt
//! inner product `tr(a b)`. All spans and null spaces are computed through an
//! SVD of stacked coordinate vectors with a threshold relative to the largest
//! singular value.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoherenceError, Result};
use crate::states::PerturbationOperator;

/// Default relative singular-value threshold for rank and null-space decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default tolerance on `max |a - a^dagger|` when accepting Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex matrix with finite entries.
///
/// Serializes as `{"rows": n, "cols": m, "entries": [[re, im], ...]}` in
/// row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix(DMatrix<Complex64>);

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = CoherenceError;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect::<Vec<_>>();
        ComplexMatrix::from_row_major(repr.rows, repr.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        let (rows, cols) = m.0.shape();
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m.0[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixRepr { rows, cols, entries }
    }
}

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(CoherenceError::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Wraps a nalgebra matrix, rejecting NaN or infinite entries.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CoherenceError::NonFinite);
        }
        Ok(ComplexMatrix(m))
    }

    pub(crate) fn new_unchecked(m: DMatrix<Complex64>) -> Self {
        ComplexMatrix(m)
    }

    pub fn identity(d: usize) -> Self {
        ComplexMatrix(DMatrix::identity(d, d))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        ComplexMatrix(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `|v><v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        let d = v.len();
        ComplexMatrix(DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()))
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        let (r, c) = self.0.shape();
        if r != c {
            return Err(CoherenceError::NotSquare { rows: r, cols: c });
        }
        Ok(r)
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus among off-diagonal entries.
    pub fn max_offdiag_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if i != j {
                    m = m.max(self.0[(i, j)].norm());
                }
            }
        }
        m
    }

    /// `max |a - a^dagger|`, or an error for non-square input.
    pub fn hermiticity_deviation(&self) -> Result<f64> {
        self.dim()?;
        Ok((&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Checks Hermiticity within `tol` and returns the symmetrized matrix `(a + a^dagger)/2`.
    pub fn to_hermitian(&self, tol: f64) -> Result<Self> {
        let deviation = self.hermiticity_deviation()?;
        if deviation >= tol {
            return Err(CoherenceError::NotHermitian { deviation });
        }
        Ok(ComplexMatrix((&self.0 + self.0.adjoint()).unscale(2.0)))
    }

    /// Hilbert-Schmidt norm `sqrt(tr(a^dagger a))`.
    pub fn hs_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.to_hermitian(HERMITIAN_TOL.max(1e-10 * self.max_abs()))?;
        let mut ev: Vec<f64> = h.0.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_shape(self, other)?;
        Ok(ComplexMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_shape(self, other)?;
        Ok(ComplexMatrix(&self.0 - &other.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(CoherenceError::DimensionMismatch {
                expected: self.cols(),
                found: other.rows(),
            });
        }
        Ok(ComplexMatrix(&self.0 * &other.0))
    }
}

fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.0.shape() != b.0.shape() {
        return Err(CoherenceError::DimensionMismatch {
            expected: a.rows() * a.cols(),
            found: b.rows() * b.cols(),
        });
    }
    Ok(())
}

/// `A+_{jk} = (|j><k| + |k><j|)/2`.
pub fn a_plus(d: usize, j: usize, k: usize) -> ComplexMatrix {
    let mut m = DMatrix::zeros(d, d);
    m[(j, k)] += Complex64::new(0.5, 0.0);
    m[(k, j)] += Complex64::new(0.5, 0.0);
    ComplexMatrix(m)
}

/// `A-_{jk} = i(|j><k| - |k><j|)/2`.
pub fn a_minus(d: usize, j: usize, k: usize) -> ComplexMatrix {
    let mut m = DMatrix::zeros(d, d);
    m[(j, k)] += Complex64::new(0.0, 0.5);
    m[(k, j)] -= Complex64::new(0.0, 0.5);
    ComplexMatrix(m)
}

/// `D_j = |j><j| - |j-1><j-1|` for `1 <= j < d`.
pub fn diagonal_difference(d: usize, j: usize) -> ComplexMatrix {
    assert!(j >= 1 && j < d, "D_j needs 1 <= j < d");
    let mut diag = vec![0.0; d];
    diag[j] = 1.0;
    diag[j - 1] = -1.0;
    ComplexMatrix::from_diagonal(&diag)
}

/// Hilbert-Schmidt inner product `tr(a b)` of two Hermitian matrices.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let d = a.dim()?;
    let db = b.dim()?;
    if d != db {
        return Err(CoherenceError::DimensionMismatch {
            expected: d,
            found: db,
        });
    }
    let a = a.to_hermitian(HERMITIAN_TOL)?;
    let b = b.to_hermitian(HERMITIAN_TOL)?;
    // tr(ab) = sum_ij a_ij b_ji
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a.0[(i, j)] * b.0[(j, i)]).re;
        }
    }
    Ok(acc)
}

/// Coordinates of a Hermitian operator in the isometric real operator basis.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBasisVector {
    dim: usize,
    coords: Vec<f64>,
}

impl HermitianBasisVector {
    /// Layout: `d` diagonal entries, then for each pair `j < k` (row-major)
    /// the `sqrt2 Re a_jk` and `sqrt2 Im a_jk` coordinates.
    pub fn from_matrix(a: &ComplexMatrix) -> Result<Self> {
        let a = a.to_hermitian(HERMITIAN_TOL)?;
        Ok(Self::from_hermitian_unchecked(&a.0))
    }

    fn from_hermitian_unchecked(a: &DMatrix<Complex64>) -> Self {
        let d = a.nrows();
        let mut coords = Vec::with_capacity(d * d);
        coords.extend((0..d).map(|i| a[(i, i)].re));
        for j in 0..d {
            for k in (j + 1)..d {
                let z = a[(j, k)];
                coords.push(SQRT_2 * z.re);
                coords.push(SQRT_2 * z.im);
            }
        }
        HermitianBasisVector { dim: d, coords }
    }

    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != dim * dim {
            return Err(CoherenceError::DimensionMismatch {
                expected: dim * dim,
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoherenceError::NonFinite);
        }
        Ok(HermitianBasisVector { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        coords_to_matrix(self.dim, &self.coords)
    }
}

fn coords_to_matrix(d: usize, coords: &[f64]) -> ComplexMatrix {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(coords[i], 0.0);
    }
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = Complex64::new(coords[idx], coords[idx + 1]) * FRAC_1_SQRT_2;
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
            idx += 2;
        }
    }
    ComplexMatrix(m)
}

/// Stacks the coordinate vectors of `ops` as rows of a real matrix.
pub(crate) fn coordinate_rows(ops: &[ComplexMatrix]) -> Result<(usize, DMatrix<f64>)> {
    let first = ops.first().ok_or(CoherenceError::Empty("operator list"))?;
    let d = first.dim()?;
    let n = d * d;
    let mut rows = DMatrix::zeros(ops.len(), n);
    for (r, op) in ops.iter().enumerate() {
        let od = op.dim()?;
        if od != d {
            return Err(CoherenceError::DimensionMismatch {
                expected: d,
                found: od,
            });
        }
        let v = HermitianBasisVector::from_matrix(op)?;
        for (c, x) in v.coords.iter().enumerate() {
            rows[(r, c)] = *x;
        }
    }
    Ok((d, rows))
}

/// Numerical rank with singular values counted above `tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn real_null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    // nalgebra returns a thin V^T; pad with zero rows so V is n x n.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("V^T requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tol * smax;
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= cut)
        .collect();
    let mut basis = DMatrix::zeros(n, null_rows.len());
    for (c, &r) in null_rows.iter().enumerate() {
        for i in 0..n {
            basis[(i, c)] = v_t[(r, i)];
        }
    }
    basis
}

/// Dimension of the real span of Hermitian operators inside the `d^2`-dimensional
/// space of Hermitian matrices.
pub fn real_span_dimension(ops: &[ComplexMatrix], tol: f64) -> Result<usize> {
    let (_, rows) = coordinate_rows(ops)?;
    Ok(numerical_rank(&rows, tol))
}

/// Hilbert-Schmidt orthonormal basis of the traceless Hermitian operators
/// orthogonal to every operator in `ops`.
pub fn null_space_in_traceless_hermitian(
    ops: &[ComplexMatrix],
    tol: f64,
) -> Result<Vec<PerturbationOperator>> {
    let (d, rows) = coordinate_rows(ops)?;
    let n = d * d;
    // Extra constraint row: the normalized identity, which enforces tr(delta) = 0.
    let mut constraints = DMatrix::zeros(rows.nrows() + 1, n);
    constraints.view_mut((0, 0), (rows.nrows(), n)).copy_from(&rows);
    let norm = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        constraints[(rows.nrows(), i)] = norm;
    }
    let basis = real_null_space(&constraints, tol);
    Ok(basis
        .column_iter()
        .map(|c| {
            let coords: Vec<f64> = c.iter().cloned().collect();
            PerturbationOperator::from_matrix_unchecked(coords_to_matrix(d, &coords))
        })
        .collect())
}

/// Minimum-norm least-squares solution of `m x = b` (one column of `x` per
/// column of `b`) with singular values below `tol * sigma_max` discarded.
pub fn least_squares_min_norm(m: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, tol * smax).expect("U and V^T were computed")
}

/// Unnormalized discrete Fourier transform, `out[z] = sum_k w^{sign k z} values[k]`
/// with `w = exp(2 pi i / d)`.
pub fn dft_vector(values: &[Complex64], sign: i32) -> Result<Vec<Complex64>> {
    let d = values.len();
    if d == 0 {
        return Err(CoherenceError::Empty("DFT input"));
    }
    if sign != 1 && sign != -1 {
        return Err(CoherenceError::InvalidParameter(format!(
            "DFT sign must be +1 or -1, got {sign}"
        )));
    }
    // Twiddles indexed by (k z mod d) keep each phase exact to one rounding.
    let twiddles: Vec<Complex64> = (0..d)
        .map(|t| Complex64::from_polar(1.0, sign as f64 * 2.0 * PI * t as f64 / d as f64))
        .collect();
    Ok((0..d)
        .map(|z| {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| twiddles[(k * z) % d] * v)
                .sum()
        })
        .collect())
}

/// 2-norm condition number `sigma_max / sigma_min` of a square complex matrix.
pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap()
    }

    #[test]
    fn hs_inner_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(hs_inner(&pauli_x(), &pauli_y()).unwrap(), 0.0);
        for d in 2..6 {
            let a = a_plus(d, 0, 1);
            assert!((hs_inner(&a, &a).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn hs_inner_rejects_bad_input() {
        let i3 = ComplexMatrix::identity(3);
        assert!(matches!(
            hs_inner(&ComplexMatrix::identity(2), &i3),
            Err(CoherenceError::DimensionMismatch { .. })
        ));
        let skew =
            ComplexMatrix::from_row_major(2, 2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(
            hs_inner(&skew, &skew),
            Err(CoherenceError::NotHermitian { .. })
        ));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let r = ComplexMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.)]);
        assert!(matches!(r, Err(CoherenceError::NonFinite)));
    }

    #[test]
    fn span_of_one_basis_is_d() {
        let ops: Vec<_> = (0..3)
            .map(|i| {
                let mut diag = vec![0.0; 3];
                diag[i] = 1.0;
                ComplexMatrix::from_diagonal(&diag)
            })
            .collect();
        assert_eq!(real_span_dimension(&ops, DEFAULT_TOL).unwrap(), 3);
        assert!(matches!(
            real_span_dimension(&[], DEFAULT_TOL),
            Err(CoherenceError::Empty(_))
        ));
    }

    #[test]
    fn null_space_of_full_operator_basis_is_empty() {
        let d = 3;
        let mut ops = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let mut m = DMatrix::zeros(d, d);
                m[(i, j)] += c(1.0, 0.0);
                m[(j, i)] += c(1.0, 0.0);
                ops.push(ComplexMatrix(m));
                if i != j {
                    ops.push(a_minus(d, i.min(j), i.max(j)));
                }
            }
        }
        assert!(null_space_in_traceless_hermitian(&ops, DEFAULT_TOL)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn null_space_of_reference_projections_is_zero_diagonal() {
        let d = 3;
        let ops: Vec<_> = (0..d)
            .map(|i| {
                let mut diag = vec![0.0; d];
                diag[i] = 1.0;
                ComplexMatrix::from_diagonal(&diag)
            })
            .collect();
        let ns = null_space_in_traceless_hermitian(&ops, DEFAULT_TOL).unwrap();
        assert_eq!(ns.len(), d * d - 1 - (d - 1));
        for delta in &ns {
            let m = delta.matrix();
            for i in 0..d {
                assert!(m.get(i, i).norm() < 1e-12);
            }
            assert!((m.hs_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dft_examples() {
        let d = 5;
        let mut delta = vec![c(0., 0.); d];
        delta[0] = c(1., 0.);
        for v in dft_vector(&delta, -1).unwrap() {
            assert!((v - c(1., 0.)).norm() < 1e-15);
        }
        let konst = vec![c(0.3, -0.2); d];
        let out = dft_vector(&konst, -1).unwrap();
        assert!((out[0] - c(1.5, -1.0)).norm() < 1e-14);
        for v in &out[1..] {
            assert!(v.norm() < 1e-14);
        }
        assert!(dft_vector(&[], -1).is_err());
        assert!(dft_vector(&konst, 2).is_err());
    }

    #[test]
    fn diagonal_difference_is_traceless() {
        let dj = diagonal_difference(4, 2);
        assert_eq!(dj.trace(), c(0., 0.));
        assert_eq!(dj.get(2, 2), c(1., 0.));
        assert_eq!(dj.get(1, 1), c(-1., 0.));
    }

    #[test]
    fn json_shape() {
        let m = pauli_y();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"rows":2,"cols":2,"entries":[[0.0,0.0],[0.0,-1.0],[0.0,1.0],[0.0,0.0]]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"rows":2,"cols":2,"entries":[[0.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
