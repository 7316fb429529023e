//! Vectorized Lindblad generators, propagation with exact λ-sensitivity,
//! Liouvillian spectra, the closed-form single-qubit solution and a
//! stochastic Schrödinger trajectory simulator.
//!
//! Vectorization is column stacking, so `vec(AXB) = (Bᵀ ⊗ A) vec(X)` and the
//! generator reads `L̂ = −i(I⊗H − Hᵀ⊗I) + λ L̂_D`.

mod analytic;
mod dop853_tableau;
mod ode;
mod propagate;
mod spectrum;
mod sse;

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{c64, kron, ComplexMatrix, HERMITICITY_TOL, I};
use crate::model::{z_value, DissipatorSpec};

pub use analytic::analytic_single_qubit;
pub use propagate::{
    propagate, propagate_with, propagate_with_lambda_derivative, propagate_with_lambda_derivative_using,
    sample_with_lambda_derivative, Backend, DENSE_MAX_DIM2,
};
pub(crate) use propagate::{propagate_pair, visit_samples};
pub use spectrum::{spectrum, steady_state, LiouvillianSpectrum, Mode, NULL_TOL, SPECTRUM_MAX_DIM2};
pub use sse::{sse_simulate, SseConfig, SseResult};

/// Hermitian matrix in compressed sparse row form.
#[derive(Debug)]
pub(crate) struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<c64>,
}

impl Csr {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let v = m[(r, c)];
                if v != c64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }
}

/// `H = diag(e) + Σₖ cₖ Xₖ` with `Xₖ` flipping basis bit `mₖ`. Every
/// Hamiltonian built in `model` has this form, which allows a commutator
/// made of contiguous column operations.
#[derive(Debug)]
struct FlipForm {
    diag: Vec<f64>,
    flips: Vec<(usize, f64)>,
}

impl FlipForm {
    fn detect(h: &ComplexMatrix) -> Option<Self> {
        let d = h.rows();
        if !d.is_power_of_two() {
            return None;
        }
        let diag: Vec<f64> = (0..d).map(|a| h[(a, a)].re).collect();
        if (0..d).any(|a| h[(a, a)].im != 0.0) {
            return None;
        }
        let mut flips = Vec::new();
        let mut m = 1;
        while m < d {
            let c = h[(m, 0)];
            if c.im != 0.0 || (0..d).any(|a| h[(a ^ m, a)] != c) {
                return None;
            }
            if c.re != 0.0 {
                flips.push((m, c.re));
            }
            m <<= 1;
        }
        let mut rebuilt = ComplexMatrix::diagonal(&diag.iter().map(|&e| c64::new(e, 0.0)).collect::<Vec<_>>());
        for &(m, c) in &flips {
            for a in 0..d {
                rebuilt[(a ^ m, a)] = c64::new(c, 0.0);
            }
        }
        (rebuilt == *h).then_some(Self { diag, flips })
    }
}

enum SparseH {
    Flip(FlipForm),
    Csr(Csr),
}

struct Shared {
    dim: usize,
    h: ComplexMatrix,
    sparse: SparseH,
    /// Unit-rate dissipator eigenvalue for vec index `a + D·b`.
    dissipator: Vec<f64>,
    unitary_dense: OnceLock<ComplexMatrix>,
    dissipative_dense: OnceLock<ComplexMatrix>,
}

/// `L̂ = L̂_U + λ·L̂_D` on column-stacked `D²`-vectors. Dense superoperators
/// are built on first use; propagation can work in matrix form without them.
#[derive(Clone)]
pub struct VectorizedLiouvillian {
    shared: Arc<Shared>,
    lambda: f64,
}

impl std::fmt::Debug for VectorizedLiouvillian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorizedLiouvillian").field("dim", &self.shared.dim).field("lambda", &self.lambda).finish()
    }
}

impl VectorizedLiouvillian {
    /// Generator for Hamiltonian `h` on `n_total` qubits with the collapse
    /// dissipator acting on the first `dissipator.n_sites()` factors.
    pub fn new(h: ComplexMatrix, dissipator: &DissipatorSpec, n_total: usize, lambda: f64) -> Result<Self> {
        check_hamiltonian(&h)?;
        if h.rows() != 1 << n_total {
            return Err(Error::invalid(format!("Hamiltonian dimension {} does not match {n_total} qubits", h.rows())));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda = {lambda} must be finite and non-negative")));
        }
        let dissipator = dissipator_diagonal(dissipator, n_total)?;
        let dim = h.rows();
        let sparse = match FlipForm::detect(&h) {
            Some(f) => SparseH::Flip(f),
            None => SparseH::Csr(Csr::from_dense(&h)),
        };
        Ok(Self {
            shared: Arc::new(Shared {
                dim,
                h,
                sparse,
                dissipator,
                unitary_dense: OnceLock::new(),
                dissipative_dense: OnceLock::new(),
            }),
            lambda,
        })
    }

    /// Same generator at another collapse rate, sharing all λ-independent data.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda = {lambda} must be finite and non-negative")));
        }
        Ok(Self { shared: Arc::clone(&self.shared), lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Hilbert-space dimension `D`.
    pub fn dim(&self) -> usize {
        self.shared.dim
    }

    pub fn dim2(&self) -> usize {
        self.shared.dim * self.shared.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.shared.h
    }

    pub fn l_unitary(&self) -> &ComplexMatrix {
        self.shared.unitary_dense.get_or_init(|| unitary_superoperator(&self.shared.h))
    }

    pub fn l_dissipative_unit(&self) -> &ComplexMatrix {
        self.shared.dissipative_dense.get_or_init(|| {
            ComplexMatrix::diagonal(&self.shared.dissipator.iter().map(|&w| c64::new(w, 0.0)).collect::<Vec<_>>())
        })
    }

    /// Dense `D²×D²` generator at the current λ.
    pub fn generator(&self) -> ComplexMatrix {
        let mut l = self.l_unitary().clone();
        for (k, w) in self.shared.dissipator.iter().enumerate() {
            l[(k, k)] += c64::new(self.lambda * w, 0.0);
        }
        l
    }

    /// `L[ρ]` in matrix form.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let src = rho.col_major();
        let mut out = vec![c64::new(0.0, 0.0); d * d];
        self.apply_into(&src, &mut out, self.lambda, None);
        ComplexMatrix::from_col_major(d, d, &out).expect("dimension preserved")
    }

    /// `out = −i[H, x] + rate·(w∘x) + w∘extra` on column-major buffers.
    pub(crate) fn apply_into(&self, x: &[c64], out: &mut [c64], rate: f64, extra: Option<&[c64]>) {
        let d = self.shared.dim;
        match &self.shared.sparse {
            SparseH::Flip(f) => {
                for b in 0..d {
                    let out_col = &mut out[b * d..(b + 1) * d];
                    let x_col = &x[b * d..(b + 1) * d];
                    let eb = f.diag[b];
                    for ((o, xa), ea) in out_col.iter_mut().zip(x_col).zip(&f.diag) {
                        *o = xa * (ea - eb);
                    }
                    for &(m, c) in &f.flips {
                        // (Hx)[a, b] gains c·x[a^m, b]; (xH)[a, b] gains c·x[a, b^m]
                        let x_flip = &x[(b ^ m) * d..((b ^ m) + 1) * d];
                        for (a, o) in out_col.iter_mut().enumerate() {
                            *o += (x_col[a ^ m] - x_flip[a]) * c;
                        }
                    }
                }
            }
            SparseH::Csr(csr) => {
                // H Hermitian, so (xH)[:, c] = Σ_k x[:, k]·conj(H[c, k])
                for c in 0..d {
                    let out_col = &mut out[c * d..(c + 1) * d];
                    let x_col = &x[c * d..(c + 1) * d];
                    for (r, o) in out_col.iter_mut().enumerate() {
                        let mut acc = c64::new(0.0, 0.0);
                        for (k, v) in csr.row(r) {
                            acc += v * x_col[k];
                        }
                        *o = acc;
                    }
                    for (k, v) in csr.row(c) {
                        let vc = v.conj();
                        let xk = &x[k * d..(k + 1) * d];
                        for (o, xi) in out_col.iter_mut().zip(xk) {
                            *o -= xi * vc;
                        }
                    }
                }
            }
        }
        let w = &self.shared.dissipator;
        // multiply the commutator by −i and add the diagonal dissipator
        match extra {
            Some(e) => {
                for (((o, xk), wk), ek) in out.iter_mut().zip(x).zip(w).zip(e) {
                    *o = c64::new(o.im, -o.re) + xk * (rate * wk) + ek * wk;
                }
            }
            None => {
                for ((o, xk), wk) in out.iter_mut().zip(x).zip(w) {
                    *o = c64::new(o.im, -o.re) + xk * (rate * wk);
                }
            }
        }
    }
}

fn check_hamiltonian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::invalid("Hamiltonian must be square"));
    }
    h.check_finite()?;
    if !h.is_hermitian(HERMITICITY_TOL) {
        return Err(Error::invalid(format!("Hamiltonian not Hermitian (defect {:.3e})", h.hermiticity_defect())));
    }
    Ok(())
}

fn unitary_superoperator(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(h.rows());
    (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(-I)
}

/// `−i(I⊗H − Hᵀ⊗I)`.
pub fn vectorize_unitary(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_hamiltonian(h)?;
    Ok(unitary_superoperator(h))
}

/// Unit-rate generator of `−½ Σᵢⱼ f(i,j) [σᶻᵢ, [σᶻⱼ, ρ]]` on `n_total`
/// qubits. It is diagonal in the computational basis.
pub fn vectorize_dissipator(spec: &DissipatorSpec, n_total: usize) -> Result<ComplexMatrix> {
    let w = dissipator_diagonal(spec, n_total)?;
    Ok(ComplexMatrix::diagonal(&w.iter().map(|&x| c64::new(x, 0.0)).collect::<Vec<_>>()))
}

fn dissipator_diagonal(spec: &DissipatorSpec, n_total: usize) -> Result<Vec<f64>> {
    if spec.n_sites() > n_total || n_total == 0 || n_total > 16 {
        return Err(Error::invalid(format!(
            "dissipator on {} sites does not fit {n_total} qubits",
            spec.n_sites()
        )));
    }
    let d = 1usize << n_total;
    let w = spec.weight_matrix();
    let n = spec.n_sites();
    let mut out = vec![0.0; d * d];
    let mut delta = vec![0.0; n];
    for b in 0..d {
        for a in 0..d {
            for (i, di) in delta.iter_mut().enumerate() {
                *di = z_value(a, i + 1, n_total) - z_value(b, i + 1, n_total);
            }
            let mut acc = 0.0;
            for i in 0..n {
                if delta[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    acc += w[i][j] * delta[i] * delta[j];
                }
            }
            out[a + d * b] = -0.5 * acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, vec};
    use crate::model::{collapse_dissipator_spec, pauli_site, Axis, NoiseKind, NoiseSpec};

    fn random_matrix(d: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(d, d, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn local(n: usize) -> DissipatorSpec {
        collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn single_qubit_generator_matches_explicit_matrix() {
        let omega = 1.3;
        let lambda = 0.2;
        let h = pauli::x().scale_real(omega / 2.0);
        let liou = VectorizedLiouvillian::new(h, &local(1), 1, lambda).unwrap();
        let half = c64::new(0.0, omega / 2.0);
        let explicit = ComplexMatrix::from_rows(&[
            vec![c64::new(0.0, 0.0), -half, half, c64::new(0.0, 0.0)],
            vec![-half, c64::new(-2.0 * lambda, 0.0), c64::new(0.0, 0.0), half],
            vec![half, c64::new(0.0, 0.0), c64::new(-2.0 * lambda, 0.0), -half],
            vec![c64::new(0.0, 0.0), half, -half, c64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(liou.generator().max_abs_diff(&explicit) < 1e-15);

        let zz = &kron(&pauli::z(), &pauli::z()) - &ComplexMatrix::identity(4);
        assert!(liou.l_dissipative_unit().max_abs_diff(&zz) < 1e-15);
    }

    #[test]
    fn unitary_part_matches_commutator() {
        let a = random_matrix(4, 1);
        let h = a.hermitian_part();
        let rho = random_matrix(4, 2);
        let lu = vectorize_unitary(&h).unwrap();
        let lhs = &lu * &vec(&rho).unwrap().as_column();
        let rhs = vec(&h.commutator(&rho).scale(-I)).unwrap().as_column();
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        assert!(vectorize_unitary(&ComplexMatrix::zeros(2, 2)).unwrap().max_abs() == 0.0);
        assert!(vectorize_unitary(&a).is_err());
    }

    #[test]
    fn dissipator_matches_double_commutators() {
        let rho = random_matrix(8, 3);
        for spec in [
            local(2),
            collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Correlated { rc_over_a: 0.8 }, 1.0).unwrap(), 2).unwrap(),
        ] {
            let ld = vectorize_dissipator(&spec, 3).unwrap();
            let lhs = &ld * &vec(&rho).unwrap().as_column();
            let mut direct = ComplexMatrix::zeros(8, 8);
            for &(i, j, f) in spec.terms() {
                let zi = pauli_site(Axis::Z, i, 3).unwrap();
                let zj = pauli_site(Axis::Z, j, 3).unwrap();
                direct = &direct - &zi.commutator(&zj.commutator(&rho)).scale_real(0.5 * f);
            }
            assert!(lhs.max_abs_diff(&vec(&direct).unwrap().as_column()) < 1e-13);

            // Lindblad form with Hermitian jump operators
            let id = ComplexMatrix::identity(8);
            let mut lindblad = ComplexMatrix::zeros(64, 64);
            for &(i, j, f) in spec.terms() {
                let zi = pauli_site(Axis::Z, i, 3).unwrap();
                let zj = pauli_site(Axis::Z, j, 3).unwrap();
                let zz = &zi * &zj;
                let term = &kron(&zj.transpose(), &zi)
                    - &(&kron(&id, &zz) + &kron(&zz.transpose(), &id)).scale_real(0.5);
                lindblad = &lindblad + &term.scale_real(f);
            }
            assert!(lindblad.max_abs_diff(&ld) < 1e-13);
        }
        assert!(vectorize_dissipator(&local(3), 2).is_err());
    }

    #[test]
    fn matrix_form_matches_dense_generator() {
        let h = random_matrix(8, 4).hermitian_part();
        let spec = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Correlated { rc_over_a: 1.5 }, 1.0).unwrap(), 2).unwrap();
        let liou = VectorizedLiouvillian::new(h, &spec, 3, 0.37).unwrap();
        let rho = random_matrix(8, 5);
        let dense = &liou.generator() * &vec(&rho).unwrap().as_column();
        let sparse = vec(&liou.apply(&rho)).unwrap().as_column();
        assert!(dense.max_abs_diff(&sparse) < 1e-13);
    }

    #[test]
    fn flip_form_detection() {
        let chain = crate::model::IsingChainSpec::new(3, 0.9, 1.0).unwrap();
        assert!(FlipForm::detect(&crate::model::ising_hamiltonian(&chain)).is_some());
        assert!(FlipForm::detect(&random_matrix(8, 9).hermitian_part()).is_none());

        let h = crate::model::ising_hamiltonian(&chain);
        let liou = VectorizedLiouvillian::new(h, &local(3), 3, 0.2).unwrap();
        assert!(matches!(liou.shared.sparse, SparseH::Flip(_)));
        let rho = random_matrix(8, 10);
        let dense = &liou.generator() * &vec(&rho).unwrap().as_column();
        let fast = vec(&liou.apply(&rho)).unwrap().as_column();
        assert!(dense.max_abs_diff(&fast) < 1e-13);
    }

    #[test]
    fn trace_preserving_and_unital() {
        let h = random_matrix(4, 6).hermitian_part();
        let liou = VectorizedLiouvillian::new(h, &local(2), 2, 0.5).unwrap();
        let l = liou.generator();
        let id = vec(&ComplexMatrix::identity(4)).unwrap().as_column();
        assert!((&l * &id).max_abs() < 1e-12);
        assert!((&id.adjoint() * &l).max_abs() < 1e-12);
        assert!(liou.with_lambda(-1.0).is_err());
    }
}
