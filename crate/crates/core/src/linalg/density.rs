use super::eig::eigh;
use super::matrix::{c64, ComplexMatrix};
use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// (within [`HERMITICITY_TOL`], [`TRACE_TOL`], [`POSITIVITY_TOL`]).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid(format!("density matrix must be square, got {}x{}", mat.rows(), mat.cols())));
        }
        mat.check_finite()?;
        let defect = mat.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::invalid(format!("density matrix not Hermitian (defect {defect:.3e})")));
        }
        let tr = mat.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} differs from 1")));
        }
        let (w, _) = eigh(&mat)?;
        if w[0] < -POSITIVITY_TOL {
            return Err(Error::invalid(format!("density matrix has negative eigenvalue {:.3e}", w[0])));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix the caller has constructed to be a valid state.
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        debug_assert!(mat.is_square());
        Self { mat }
    }

    /// Validates after symmetrizing away round-off in the anti-Hermitian part.
    pub fn from_numerical(mat: ComplexMatrix) -> Result<Self> {
        if mat.hermiticity_defect() > HERMITICITY_TOL {
            return Err(Error::Numerical(format!(
                "propagated state lost Hermiticity (defect {:.3e})",
                mat.hermiticity_defect()
            )));
        }
        Self::new(mat.hermitian_part())
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.mat)?.0)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// `(Tr σˣρ, Tr σʸρ, Tr σᶻρ)` for a qubit.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::invalid("Bloch vector needs a qubit state"));
        }
        Ok(bloch_components(&self.mat))
    }
}

/// Bloch components of any 2×2 operator under `σᶻ = diag(−1, +1)`.
pub(crate) fn bloch_components(m: &ComplexMatrix) -> [f64; 3] {
    let off = m[(1, 0)];
    let off_t = m[(0, 1)];
    [
        (off + off_t).re,
        // Tr(σʸρ) with σʸ = [[0, i], [−i, 0]]
        (c64::new(0.0, 1.0) * off + c64::new(0.0, -1.0) * off_t).re,
        (m[(1, 1)] - m[(0, 0)]).re,
    ]
}

/// Column-stacked vectorization of a `D×D` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct VecState {
    entries: Vec<c64>,
    side: usize,
}

impl VecState {
    pub fn new(entries: Vec<c64>) -> Result<Self> {
        let side = (entries.len() as f64).sqrt().round() as usize;
        if side == 0 || side * side != entries.len() {
            return Err(Error::invalid(format!("vectorized state length {} is not a perfect square", entries.len())));
        }
        Ok(Self { entries, side })
    }

    pub fn dim2(&self) -> usize {
        self.entries.len()
    }

    /// Hilbert-space dimension `D`.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[c64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨⟨self|other⟩⟩ = Σ conj(selfᵢ)·otherᵢ = Tr(self† other)`.
    pub fn inner(&self, other: &VecState) -> c64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.entries.len(), 1, |i, _| self.entries[i])
    }

    pub(crate) fn from_column(col: &ComplexMatrix) -> Result<Self> {
        Self::new((0..col.rows()).map(|i| col[(i, 0)]).collect())
    }
}

/// `vec([[a, b], [c, d]]) = (a, c, b, d)ᵀ`.
pub fn vec(m: &ComplexMatrix) -> Result<VecState> {
    if !m.is_square() {
        return Err(Error::invalid(format!("vec expects a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    VecState::new(m.col_major())
}

pub fn unvec(v: &VecState, dim: usize) -> Result<ComplexMatrix> {
    if dim * dim != v.dim2() {
        return Err(Error::invalid(format!("cannot unvec length {} into {dim}x{dim}", v.dim2())));
    }
    ComplexMatrix::from_col_major(dim, dim, v.entries())
}

/// Traces out every tensor factor not listed in `keep` (0-based factor
/// positions). Kept factors retain their relative order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(rho.matrix(), dims, keep)?;
    Ok(DensityMatrix::from_trusted(reduced))
}

/// Partial trace of an arbitrary square operator (used for `∂ρ` as well).
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.rows() || !m.is_square() {
        return Err(Error::invalid(format!("factor dimensions {dims:?} do not match operator dimension {}", m.rows())));
    }
    if keep.is_empty() {
        return Err(Error::invalid("keep set must be non-empty"));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::invalid(format!("factor {k} out of range for {} factors", dims.len())));
        }
        if kept[k] {
            return Err(Error::invalid(format!("factor {k} listed twice")));
        }
        kept[k] = true;
    }

    // Row-major-style digits: factor 0 is the most significant.
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; dims.len()];
        for f in (0..dims.len()).rev() {
            d[f] = idx % dims[f];
            idx /= dims[f];
        }
        d
    };
    let fold = |d: &[usize], take_kept: bool| -> usize {
        (0..dims.len()).filter(|&f| kept[f] == take_kept).fold(0, |acc, f| acc * dims[f] + d[f])
    };

    let out_dim: usize = (0..dims.len()).filter(|&f| kept[f]).map(|f| dims[f]).product();
    let decoded: Vec<(usize, usize)> = (0..total)
        .map(|i| {
            let d = digits(i);
            (fold(&d, true), fold(&d, false))
        })
        .collect();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for j in 0..total {
        let (kj, tj) = decoded[j];
        for i in 0..total {
            let (ki, ti) = decoded[i];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Thermal state `exp(−βH)/Tr exp(−βH)` built from the Hermitian
/// eigendecomposition of `h`.
pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    if !h.is_square() || !h.is_hermitian(HERMITICITY_TOL) {
        return Err(Error::invalid("Gibbs state requires a Hermitian Hamiltonian"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("inverse temperature must be finite and non-negative, got {beta}")));
    }
    let (energies, v) = eigh(h)?;
    let e0 = energies[0];
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = h.rows();
    let mut rho = ComplexMatrix::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        let p = w / z;
        if p == 0.0 {
            continue;
        }
        for j in 0..n {
            let vj = v[(j, k)].conj() * p;
            for i in 0..n {
                rho[(i, j)] += v[(i, k)] * vj;
            }
        }
    }
    DensityMatrix::new(rho.hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli};

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn vec_is_column_stacking() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]).unwrap();
        let v = vec(&m).unwrap();
        assert_eq!(v.entries(), &[c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(unvec(&v, 2).unwrap(), m);
        assert!(unvec(&v, 3).is_err());
        assert!(vec(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!(VecState::new(vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn vec_identity_normalized() {
        let v = vec(&ComplexMatrix::identity(2).scale_real(1.0 / 2f64.sqrt())).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert_eq!(v.entries()[1], c(0.0, 0.0));
    }

    #[test]
    fn partial_trace_of_bell_state_is_mixed() {
        let s = 0.5f64.sqrt();
        let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let m = ComplexMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
        let rho = DensityMatrix::new(m).unwrap();
        let red = partial_trace(&rho, &[2, 2], &[1]).unwrap();
        assert!(red.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.7, 0.1], &[0.1, 0.3]]).unwrap()).unwrap();
        let b = DensityMatrix::new(ComplexMatrix::from_rows(&[vec![c(0.4, 0.0), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.6, 0.0)]]).unwrap()).unwrap();
        let ab = DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
        let rb = partial_trace(&ab, &[2, 2], &[1]).unwrap();
        let ra = partial_trace(&ab, &[2, 2], &[0]).unwrap();
        assert!(rb.matrix().max_abs_diff(b.matrix()) < 1e-12);
        assert!(ra.matrix().max_abs_diff(a.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn gibbs_limits() {
        let h = pauli::x().scale_real(0.5);
        let inf_t = gibbs_state(&h, 0.0).unwrap();
        assert!(inf_t.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        // β ω0 = 10³: ground state of σˣ is (|0⟩ − |1⟩)/√2
        let cold = gibbs_state(&h, 1e3).unwrap();
        let ground = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!(cold.matrix().max_abs_diff(&ground) < 1e-6);

        assert!(gibbs_state(&pauli::x().scale(c(0.0, 1.0)), 1.0).is_err());
        assert!(gibbs_state(&h, -1.0).is_err());
    }

    #[test]
    fn gibbs_two_level_populations() {
        // closed-form partition function of (1/2)σˣ at β = 1
        let h = pauli::x().scale_real(0.5);
        let rho = gibbs_state(&h, 1.0).unwrap();
        let z = 0.5f64.exp() + (-0.5f64).exp();
        let p_ground = 0.5f64.exp() / z;
        let p_excited = (-0.5f64).exp() / z;
        let s = 0.5f64.sqrt();
        let plus = [c(s, 0.0), c(s, 0.0)];
        let minus = [c(s, 0.0), c(-s, 0.0)];
        let expval = |v: &[c64; 2]| -> f64 {
            let mut acc = c(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    acc += v[i].conj() * rho.matrix()[(i, j)] * v[j];
                }
            }
            acc.re
        };
        assert!((expval(&minus) - p_ground).abs() < 1e-14);
        assert!((expval(&plus) - p_excited).abs() < 1e-14);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.5, 0.2], &[0.1, 0.5]]).unwrap()).is_err());
        let bloch = DensityMatrix::maximally_mixed(2).bloch_vector().unwrap();
        assert_eq!(bloch, [0.0, 0.0, 0.0]);
        let up = DensityMatrix::new(ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(up.bloch_vector().unwrap(), [0.0, 0.0, 1.0]);
    }
}
