//! Eigendecompositions and dense solves, backed by faer.
//!
//! Orderings are deterministic: Hermitian eigenvalues ascending; general
//! eigenvalues by descending real part, then ascending imaginary part.

use std::cmp::Ordering;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Side;

use super::matrix::{c64, ComplexMatrix};
use crate::error::{Error, Result};

/// Hermitian eigendecomposition `h = V·diag(w)·V†`, eigenvalues ascending.
pub fn eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !h.is_square() {
        return Err(Error::invalid("eigh needs a square matrix"));
    }
    let sym = h.hermitian_part();
    let evd = sym
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver: {e:?}")))?;
    let n = h.rows();
    let s = evd.S();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vectors = ComplexMatrix::from_faer(evd.U().to_owned());
    // faer already sorts ascending; keep the contract explicit.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values = order.iter().map(|&k| values[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Ordering used for every general spectrum in the crate.
pub fn spectral_order(a: &c64, b: &c64) -> Ordering {
    b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im))
}

/// Sorts by [`spectral_order`], treating real parts that agree to round-off
/// (`1e-10·max(1, |l|)`) as equal so conjugate pairs order by imaginary part.
pub(crate) fn spectral_permutation(values: &[c64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[y].re.total_cmp(&values[x].re));
    let mut start = 0;
    while start < order.len() {
        let anchor = values[order[start]];
        let mut end = start + 1;
        while end < order.len() {
            let v = values[order[end]];
            if (anchor.re - v.re).abs() > 1e-10 * anchor.norm().max(v.norm()).max(1.0) {
                break;
            }
            end += 1;
        }
        order[start..end].sort_by(|&x, &y| values[x].im.total_cmp(&values[y].im));
        start = end;
    }
    order
}

/// General eigendecomposition `a·V = V·diag(l)`, columns of `V` unit norm.
pub fn eig(a: &ComplexMatrix) -> Result<(Vec<c64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::invalid("eig needs a square matrix"));
    }
    let evd = a
        .as_faer()
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let n = a.rows();
    let s = evd.S();
    let u = evd.U();
    let raw: Vec<c64> = (0..n).map(|k| s[k]).collect();
    let order = spectral_permutation(&raw);
    let values: Vec<c64> = order.iter().map(|&k| raw[k]).collect();
    let mut vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    for j in 0..n {
        let norm = (0..n).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                vectors[(i, j)] /= norm;
            }
        }
    }
    Ok((values, vectors))
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::invalid("inverse needs a square matrix"));
    }
    let inv = ComplexMatrix::from_faer(a.as_faer().partial_piv_lu().inverse());
    inv.check_finite()?;
    Ok(inv)
}

/// Solves `a·x = b`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::invalid("solve: dimension mismatch"));
    }
    let x = ComplexMatrix::from_faer(a.as_faer().partial_piv_lu().solve(b.as_faer()));
    x.check_finite()?;
    Ok(x)
}
