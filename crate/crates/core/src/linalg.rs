//! Dense complex matrices and the Hilbert-Schmidt geometry of `L(V)`.
//!
//! Storage is row-major. Heavy kernels (products, QR, singular values,
//! Hermitian eigenvalues) run on `faer` views over the same buffer; they are
//! always called with sequential parallelism so results are reproducible
//! bit-for-bit on one machine.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Mul, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest row count a Kronecker product may produce before we refuse to
/// materialize it.
pub const DEFAULT_DIM_CAP: usize = 1 << 16;

/// Relative unitarity tolerance: `|U^dag U - I|_F <= UNITARY_TOL * n`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Above this many rows/cols, [`ComplexMatrix::spectral_norm`] switches from a
/// full SVD to the top eigenvalue of the Gram matrix.
const SVD_GRAM_SWITCH: usize = 1024;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes, length
    /// mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape {
                rows,
                cols,
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// The completely mixed state `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let mut m = Self::identity(n);
        m.scale_mut(1.0 / n as f64);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Square matrix from nested rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::InvalidShape {
                    rows: n_rows,
                    cols: n_cols,
                    expected: n_rows * n_cols,
                    found: data.len() + row.len(),
                });
            }
            data.extend(row.iter().map(|&(re, im)| Complex64::new(re, im)));
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn view(&self) -> MatRef<'_, Complex64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    fn view_mut(&mut self) -> MatMut<'_, Complex64> {
        MatMut::from_row_major_slice_mut(&mut self.data, self.rows, self.cols)
    }

    pub fn from_faer(m: MatRef<'_, Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `sum |x_ij|^2`, i.e. `<X, X>`.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum()
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale_mut(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// `self * rhs`. Panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        matmul(out.view_mut(), Accum::Replace, self.view(), rhs.view(), ONE, Par::Seq);
        out
    }

    /// `self * rhs^dag` without forming the adjoint.
    pub fn mul_adjoint(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "mul_adjoint: inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.rows);
        matmul(
            out.view_mut(),
            Accum::Replace,
            self.view(),
            rhs.view().adjoint(),
            ONE,
            Par::Seq,
        );
        out
    }

    /// `self^dag * rhs`.
    pub fn adjoint_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul: inner dimensions differ");
        let mut out = Self::zeros(self.cols, rhs.cols);
        matmul(
            out.view_mut(),
            Accum::Replace,
            self.view().adjoint(),
            rhs.view(),
            ONE,
            Par::Seq,
        );
        out
    }

    /// `u * self * u^dag`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).mul_adjoint(u)
    }

    /// Operator 2-norm (largest singular value).
    ///
    /// Small matrices use a full SVD; once the smaller side exceeds 1024 the
    /// value is `sqrt(lambda_max(A^dag A))` from a dense Hermitian
    /// eigensolve, which is roughly twice as fast at that size.
    pub fn spectral_norm(&self) -> Result<f64> {
        if self.rows.min(self.cols) > SVD_GRAM_SWITCH {
            let gram = if self.rows >= self.cols {
                self.adjoint_mul(self)
            } else {
                self.mul_adjoint(self)
            };
            let top = gram.hermitian_eigenvalues()?.last().copied().unwrap_or(0.0);
            Ok(top.max(0.0).sqrt())
        } else {
            Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
        }
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.view()
            .singular_values()
            .map_err(|e| Error::Numerical(format!("svd: {e:?}")))
    }

    /// Eigenvalues of a Hermitian matrix in non-decreasing order; only the
    /// lower triangle is read.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.view()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("evd: {e:?}")))
    }

    /// `|U^dag U - I|_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut g = self.adjoint_mul(self);
        for i in 0..g.rows.min(g.cols) {
            g[(i, i)] -= ONE;
        }
        g.norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (r..self.cols).all(|c| (self[(r, c)] - self[(c, r)].conj()).norm() <= tol))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// A square matrix that passed the unitarity check
/// `|U^dag U - I|_F <= 1e-10 * n`.
#[derive(Clone, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary{:?}", self.0)
    }
}

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        let tolerance = UNITARY_TOL * m.rows as f64;
        let deviation = m.unitarity_defect();
        if deviation.is_nan() || deviation > tolerance {
            return Err(Error::NotUnitary { deviation, tolerance });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix known to be unitary by construction (products, Kronecker
    /// products and adjoints of validated unitaries).
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self(self.0.matmul(&rhs.0))
    }

    pub fn tensor(&self, rhs: &Self, cap: usize) -> Result<Self> {
        tensor_with_cap(&self.0, &rhs.0, cap).map(Self)
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

fn ensure_same_shape(op: &'static str, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if x.rows != y.rows || x.cols != y.cols {
        return Err(Error::DimensionMismatch {
            op,
            left_rows: x.rows,
            left_cols: x.cols,
            right_rows: y.rows,
            right_cols: y.cols,
        });
    }
    Ok(())
}

/// Largest singular value of a real matrix, with the same SVD / Gram switch
/// as [`ComplexMatrix::spectral_norm`].
pub(crate) fn real_spectral_norm(a: MatRef<'_, f64>) -> Result<f64> {
    if a.nrows().min(a.ncols()) > SVD_GRAM_SWITCH {
        let k = a.nrows().min(a.ncols());
        let mut gram = Mat::<f64>::zeros(k, k);
        if a.nrows() >= a.ncols() {
            matmul(gram.as_mut(), Accum::Replace, a.transpose(), a, 1.0, Par::Seq);
        } else {
            matmul(gram.as_mut(), Accum::Replace, a, a.transpose(), 1.0, Par::Seq);
        }
        let eig = gram
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("evd: {e:?}")))?;
        Ok(eig.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    } else {
        let sv = a
            .singular_values()
            .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
        Ok(sv.first().copied().unwrap_or(0.0))
    }
}

/// Hilbert-Schmidt inner product `<X, Y> = Tr(X Y^dag)`.
pub fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<Complex64> {
    ensure_same_shape("hs_inner", x, y)?;
    Ok(hs_inner_unchecked(x, y))
}

#[inline]
pub(crate) fn hs_inner_unchecked(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    x.data.iter().zip(&y.data).map(|(a, b)| a * b.conj()).sum()
}

/// Kronecker product with the default materialization cap.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

/// Kronecker product `A (x) B`; the first factor's index is major.
pub fn tensor_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows.saturating_mul(b.rows);
    let cols = a.cols.saturating_mul(b.cols);
    let requested = rows.max(cols);
    if requested > cap {
        return Err(Error::CapExceeded {
            what: "tensor product",
            requested,
            cap,
            hint: "raise the materialization cap or keep the product symbolic",
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for ar in 0..a.rows {
        for br in 0..b.rows {
            for ac in 0..a.cols {
                let x = a[(ar, ac)];
                data.extend(b.data[br * b.cols..(br + 1) * b.cols].iter().map(|&y| x * y));
            }
        }
    }
    Ok(ComplexMatrix { rows, cols, data })
}

/// Folds Kronecker products left to right: `((A (x) B) (x) C) ...`.
pub fn tensor_all(factors: &[&ComplexMatrix], cap: usize) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("tensor_all needs at least one factor".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, m| tensor_with_cap(&acc, m, cap))
}

pub(crate) fn check_factorization(x: &ComplexMatrix, dim1: usize, dim2: usize) -> Result<()> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows,
            cols: x.cols,
        });
    }
    if dim1 == 0 || dim2 == 0 || dim1.checked_mul(dim2) != Some(x.rows) {
        return Err(Error::FactorizationMismatch {
            dim: x.rows,
            dim1,
            dim2,
        });
    }
    Ok(())
}

/// Partial trace over the second tensor factor, `Tr_2(X)`.
pub fn partial_trace_second(x: &ComplexMatrix, dim1: usize, dim2: usize) -> Result<ComplexMatrix> {
    check_factorization(x, dim1, dim2)?;
    Ok(ComplexMatrix::from_fn(dim1, dim1, |a, a2| {
        (0..dim2).map(|b| x[(a * dim2 + b, a2 * dim2 + b)]).sum()
    }))
}

/// Complex Ginibre matrix: independent entries with `E|z|^2 = 1`.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Deterministic generator used for every seeded draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random unitary of dimension `n`, deterministic in `seed`.
pub fn haar_unitary(n: usize, seed: u64) -> UnitaryMatrix {
    haar_unitary_from_rng(n, &mut seeded_rng(seed))
}

/// Haar sample via QR of a Ginibre matrix, with `Q` right-multiplied by the
/// phases of `diag(R)` so the distribution is exactly Haar.
pub fn haar_unitary_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    assert!(n >= 1, "haar_unitary needs n >= 1");
    let z = ginibre(n, n, rng);
    let qr = z.view().qr();
    let q: Mat<Complex64> = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            let m = d.norm();
            if m > 0.0 {
                d / m
            } else {
                ONE
            }
        })
        .collect();
    let u = ComplexMatrix::from_fn(n, n, |row, col| q[(row, col)] * phases[col]);
    UnitaryMatrix::from_trusted(u)
}

/// Pauli matrices `I, X, Y, Z`.
pub fn pauli(which: char) -> ComplexMatrix {
    let i = Complex64::new(0.0, 1.0);
    let d = |a, b, c, e| ComplexMatrix {
        rows: 2,
        cols: 2,
        data: vec![a, b, c, e],
    };
    match which {
        'I' => ComplexMatrix::identity(2),
        'X' => d(ZERO, ONE, ONE, ZERO),
        'Y' => d(ZERO, -i, i, ZERO),
        'Z' => d(ONE, ZERO, ZERO, -ONE),
        other => panic!("unknown Pauli matrix {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_of_identities_is_dimension() {
        for n in 1..6 {
            let i = ComplexMatrix::identity(n);
            assert_eq!(hs_inner(&i, &i).unwrap(), c(n as f64, 0.0));
        }
    }

    #[test]
    fn traceless_is_orthogonal_to_mixed_state() {
        let z = hs_inner(&pauli('X'), &ComplexMatrix::maximally_mixed(2)).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn inner_rejects_shape_mismatch() {
        let err = hs_inner(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn inner_is_conjugate_linear_in_second_argument() {
        let mut rng = seeded_rng(3);
        let x = ginibre(3, 3, &mut rng);
        let y = ginibre(3, 3, &mut rng);
        let s = c(0.3, -1.2);
        let lhs = hs_inner(&x, &y.scaled(s)).unwrap();
        let rhs = hs_inner(&x, &y).unwrap() * s.conj();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn new_validates_shape_and_finiteness() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ONE; 3]),
            Err(Error::InvalidShape { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ONE, c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(ComplexMatrix::new(0, 2, vec![]), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn kron_of_identities() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_sigma_x_sigma_z_blocks() {
        let k = tensor(&pauli('X'), &pauli('Z')).unwrap();
        let z = pauli('Z');
        for r in 0..2 {
            for col in 0..2 {
                assert_eq!(k[(r, col)], ZERO);
                assert_eq!(k[(r + 2, col + 2)], ZERO);
                assert_eq!(k[(r, col + 2)], z[(r, col)]);
                assert_eq!(k[(r + 2, col)], z[(r, col)]);
            }
        }
    }

    #[test]
    fn kron_respects_cap() {
        let a = ComplexMatrix::identity(8);
        let err = tensor_with_cap(&a, &a, 63).unwrap_err();
        assert!(matches!(
            err,
            Error::CapExceeded {
                requested: 64,
                cap: 63,
                ..
            }
        ));
        assert!(tensor_with_cap(&a, &a, 64).is_ok());
    }

    #[test]
    fn kron_left_fold_matches_nested_exactly() {
        let mut rng = seeded_rng(11);
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let d = ginibre(2, 2, &mut rng);
        let folded = tensor_all(&[&a, &b, &d], DEFAULT_DIM_CAP).unwrap();
        let nested = tensor(&tensor(&a, &b).unwrap(), &d).unwrap();
        assert_eq!(folded, nested);
        let right = tensor(&a, &tensor(&b, &d).unwrap()).unwrap();
        assert!((&folded - &right).max_abs() < 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = seeded_rng(5);
        let sigma = ginibre(2, 2, &mut rng);
        let tau = ginibre(3, 3, &mut rng);
        let pt = partial_trace_second(&tensor(&sigma, &tau).unwrap(), 2, 3).unwrap();
        let expected = sigma.scaled(tau.trace());
        assert!((&pt - &expected).max_abs() < 1e-14);

        let mixed = ComplexMatrix::maximally_mixed(3);
        let pt = partial_trace_second(&tensor(&sigma, &mixed).unwrap(), 2, 3).unwrap();
        assert!((&pt - &sigma).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_factorization() {
        let x = ComplexMatrix::identity(6);
        assert!(matches!(
            partial_trace_second(&x, 4, 2),
            Err(Error::FactorizationMismatch {
                dim: 6,
                dim1: 4,
                dim2: 2
            })
        ));
    }

    #[test]
    fn partial_trace_preserves_trace_against_block_sum() {
        let mut rng = seeded_rng(8);
        let x = ginibre(6, 6, &mut rng);
        let pt = partial_trace_second(&x, 2, 3).unwrap();
        // Oracle: sum the diagonals of the two 3x3 diagonal blocks by hand.
        let mut block_sum = ZERO;
        for blk in 0..2 {
            for b in 0..3 {
                block_sum += x[(blk * 3 + b, blk * 3 + b)];
            }
        }
        assert!((pt.trace() - block_sum).norm() < 1e-13);
        assert!((pt.trace() - x.trace()).norm() < 1e-13);
    }

    #[test]
    fn haar_scalar_has_unit_modulus() {
        for seed in 0..20 {
            let u = haar_unitary(1, seed);
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_is_unitary_and_deterministic() {
        for n in [2, 3, 5, 16, 33] {
            let u = haar_unitary(n, 42);
            assert!(u.unitarity_defect() <= 1e-10 * n as f64);
        }
        let a = haar_unitary(4, 1234);
        let b = haar_unitary(4, 1234);
        let bits = |m: &UnitaryMatrix| -> Vec<(u64, u64)> {
            m.as_slice().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&haar_unitary(4, 1235)));
    }

    #[test]
    fn haar_second_moment_of_trace() {
        // E|Tr U|^2 = 1 for Haar U, any n.
        let mut rng = seeded_rng(2024);
        let mean: f64 = (0..1000)
            .map(|_| haar_unitary_from_rng(2, &mut rng).trace().norm_sqr())
            .sum::<f64>()
            / 1000.0;
        assert!((0.9..=1.1).contains(&mean), "mean |Tr U|^2 = {mean}");
    }

    #[test]
    fn unitary_check_rejects_perturbation() {
        let mut m = ComplexMatrix::identity(3);
        m[(0, 1)] = c(1e-3, 0.0);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary { .. })));
        assert!(UnitaryMatrix::new(pauli('Y')).is_ok());
    }

    #[test]
    fn spectral_norm_paths_agree() {
        let mut rng = seeded_rng(9);
        let m = ginibre(40, 40, &mut rng);
        let svd = m.singular_values().unwrap()[0];
        let gram = m.adjoint_mul(&m).hermitian_eigenvalues().unwrap();
        assert!((svd - gram.last().unwrap().sqrt()).abs() < 1e-10);
        assert!((m.spectral_norm().unwrap() - svd).abs() < 1e-12);
    }
}
