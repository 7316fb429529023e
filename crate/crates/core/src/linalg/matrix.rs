use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as c64;

pub(crate) const ONE: c64 = c64::new(1.0, 0.0);
pub(crate) const ZERO: c64 = c64::new(0.0, 0.0);
pub(crate) const I: c64 = c64::new(0.0, 1.0);

/// Dense complex matrix indexed by `(row, col)`.
///
/// Storage is column-major, which makes column-stacking vectorization a
/// plain copy of the underlying buffer.
#[derive(Clone)]
pub struct ComplexMatrix {
    inner: Mat<c64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: Mat::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self { inner: Mat::from_fn(rows, cols, f) }
    }

    /// Builds a matrix from row slices. Rows must have equal length and all
    /// entries must be finite.
    pub fn from_rows(rows: &[Vec<c64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid("matrix must have at least one row and column"));
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("ragged rows"));
        }
        let m = Self::from_fn(n_rows, n_cols, |i, j| rows[i][j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<c64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Column-major constructor; `entries.len()` must equal `rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, entries: &[c64]) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::invalid(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i + rows * j]))
    }

    pub fn diagonal(d: &[c64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO })
    }

    pub fn from_faer(inner: Mat<c64>) -> Self {
        Self { inner }
    }

    pub fn as_faer(&self) -> MatRef<'_, c64> {
        self.inner.as_ref()
    }

    pub fn into_faer(self) -> Mat<c64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.inner[(row, col)]
    }

    /// Entries in column-major order.
    pub fn col_major(&self) -> Vec<c64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for j in 0..self.cols() {
            out.extend(self.inner.col(j).iter().copied());
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        (0..self.cols()).all(|j| self.inner.col(j).iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Numerical("matrix has non-finite entries".into()))
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "matmul shape mismatch");
        ComplexMatrix { inner: mm(self.as_faer(), rhs.as_faer()) }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols(), self.rows(), |i, j| self.inner[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols(), self.rows(), |i, j| self.inner[(j, i)])
    }

    pub fn conj(&self) -> ComplexMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.inner[(i, j)].conj())
    }

    pub fn trace(&self) -> c64 {
        (0..self.rows().min(self.cols())).map(|i| self.inner[(i, i)]).sum()
    }

    pub fn scale(&self, s: c64) -> ComplexMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.inner[(i, j)] * s)
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.scale(c64::new(s, 0.0))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        kron(self, other)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.cols() {
            for z in self.inner.col(j).iter() {
                m = m.max(z.norm());
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        (self - other).max_abs()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.inner.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.cols() {
            s += self.inner.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        s.sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in i..n {
                m = m.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        let n = self.rows();
        Self::from_fn(n, n, |i, j| (self.inner[(i, j)] + self.inner[(j, i)].conj()) * 0.5)
    }
}

pub(crate) fn mm(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, ONE, Par::Seq);
    out
}

/// Kronecker product with row index `i_a·r_b + i_b` and column index
/// `j_a·c_b + j_b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * rb, a.cols() * cb, |i, j| {
        a.inner[(i / rb, j / cb)] * b.inner[(i % rb, j % cb)]
    })
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = c64;
    fn index(&self, idx: (usize, usize)) -> &c64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut c64 {
        &mut self.inner[idx]
    }
}

impl PartialEq for ComplexMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows() == other.rows()
            && self.cols() == other.cols()
            && (0..self.cols()).all(|j| (0..self.rows()).all(|i| self.inner[(i, j)] == other.inner[(i, j)]))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// The single-qubit Pauli matrices in the `(|0⟩, |1⟩)` basis with
/// `σᶻ = |1⟩⟨1| − |0⟩⟨0| = diag(−1, +1)`.
pub mod pauli {
    use super::{c64, ComplexMatrix, I, ONE, ZERO};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    /// `σʸ = i(|0⟩⟨1| − |1⟩⟨0|)`, fixed by `σˣσʸ = iσᶻ`.
    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => I,
            (1, 0) => -I,
            _ => ZERO,
        })
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[c64::new(-1.0, 0.0), ONE])
    }
}
