#![allow(dead_code)]

use critprobe_core::linalg::{ComplexMatrix, DensityMatrix};
use critprobe_core::c64;
use proptest::prelude::*;

pub fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| ComplexMatrix::from_fn(n, n, |i, j| c64::new(v[i * n + j].0, v[i * n + j].1)))
}

pub fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n).prop_map(|m| m.hermitian_part())
}

/// Random full-rank state `MM†/Tr(MM†)` mixed with a little of `I/n`.
pub fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    matrix(n).prop_map(move |m| {
        let p = (&m * &m.adjoint()).hermitian_part();
        let tr = p.trace().re;
        let mixed = &p.scale_real(0.95 / tr) + &ComplexMatrix::identity(n).scale_real(0.05 / n as f64);
        DensityMatrix::new(mixed).unwrap()
    })
}

/// Hermitian, traceless direction.
pub fn tangent(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    hermitian(n).prop_map(move |h| {
        let tr = h.trace().re / n as f64;
        &h - &ComplexMatrix::identity(n).scale_real(tr)
    })
}

/// Unitary `exp(−iH)` from a random Hermitian generator.
pub fn unitary(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    hermitian(n).prop_map(|h| critprobe_core::linalg::expm(&h.scale(c64::new(0.0, -2.0))).unwrap())
}
