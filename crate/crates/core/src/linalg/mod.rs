//! Dense complex linear algebra: matrices, states, decompositions and the
//! matrix exponential.

mod density;
mod eig;
mod expm;
mod matrix;

pub use density::{
    gibbs_state, partial_trace, partial_trace_matrix, unvec, vec, DensityMatrix, VecState, HERMITICITY_TOL,
    POSITIVITY_TOL, TRACE_TOL,
};
#[cfg(test)]
pub(crate) use density::bloch_components;
pub use eig::{eig, eigh, inverse, solve, spectral_order};
pub use expm::{expm, expm_frechet};
pub use matrix::{c64, kron, pauli, ComplexMatrix};
pub(crate) use matrix::I;
