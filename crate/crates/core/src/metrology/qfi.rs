use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, ComplexMatrix, DensityMatrix};

/// Eigenvalue pairs with `ϱᵢ + ϱⱼ` at or below this are dropped.
pub const EIGEN_CUTOFF: f64 = 1e-12;
const DERIVATIVE_TOL: f64 = 1e-8;

fn check_derivative(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<()> {
    if drho.rows() != rho.dim() || !drho.is_square() {
        return Err(Error::invalid(format!(
            "derivative is {}x{}, state is {}x{}",
            drho.rows(),
            drho.cols(),
            rho.dim(),
            rho.dim()
        )));
    }
    drho.check_finite()?;
    if drho.hermiticity_defect() > DERIVATIVE_TOL {
        return Err(Error::invalid(format!("derivative not Hermitian (defect {:.3e})", drho.hermiticity_defect())));
    }
    if drho.trace().norm() > DERIVATIVE_TOL * drho.max_abs().max(1.0) {
        return Err(Error::invalid(format!("derivative not traceless (trace {})", drho.trace())));
    }
    Ok(())
}

/// `∂ρ` in the eigenbasis of `ρ`, plus the eigenvalues.
fn eigenframe(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix, ComplexMatrix)> {
    let (w, v) = eigh(rho.matrix())?;
    let d = &(&v.adjoint() * drho) * &v;
    Ok((w, v, d))
}

/// Symmetric logarithmic derivative `Λ` with `∂ρ = (Λρ + ρΛ)/2`.
pub fn sld(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_derivative(rho, drho)?;
    let (w, v, d) = eigenframe(rho, drho)?;
    let n = w.len();
    let lam = ComplexMatrix::from_fn(n, n, |i, j| {
        let s = w[i] + w[j];
        if s > EIGEN_CUTOFF {
            d[(i, j)] * (2.0 / s)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    Ok((&(&v * &lam) * &v.adjoint()).hermitian_part())
}

/// `G = Σ_{ϱᵢ+ϱⱼ > cutoff} 2|⟨i|∂ρ|j⟩|²/(ϱᵢ + ϱⱼ)`.
pub fn qfi_general(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<f64> {
    check_derivative(rho, drho)?;
    let (w, _, d) = eigenframe(rho, drho)?;
    let mut g = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            let s = w[i] + w[j];
            if s > EIGEN_CUTOFF {
                g += 2.0 * d[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(g.max(0.0))
}

/// Qubit QFI split into the classical part `Σⱼ (∂ϱⱼ)²/ϱⱼ` and the quantum
/// part `2κ(|⟨ψ₋|∂ψ₊⟩|² + |⟨ψ₊|∂ψ₋⟩|²)` with `κ = (1 − 2ϱ₊)²`.
pub fn qfi_qubit(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::invalid(format!("qubit formula needs a 2x2 state, got {}x{}", rho.dim(), rho.dim())));
    }
    check_derivative(rho, drho)?;
    let (w, _, d) = eigenframe(rho, drho)?;
    let (p_minus, p_plus) = (w[0], w[1]);

    let mut classical = 0.0;
    for (k, p) in [p_minus, p_plus].into_iter().enumerate() {
        if p > EIGEN_CUTOFF {
            classical += d[(k, k)].re.powi(2) / p;
        }
    }

    // first-order perturbation: ⟨ψ₋|∂ψ₊⟩ = ⟨ψ₋|∂ρ|ψ₊⟩/(ϱ₊ − ϱ₋)
    let split = p_plus - p_minus;
    let coupling = d[(0, 1)].norm_sqr();
    let quantum = if split.abs() > EIGEN_CUTOFF {
        let kappa = (1.0 - 2.0 * p_plus).powi(2);
        let overlap_sq = coupling / (split * split);
        2.0 * kappa * (overlap_sq + overlap_sq)
    } else {
        // κ/(ϱ₊ − ϱ₋)² → 1 for a unit-trace state
        4.0 * coupling
    };
    Ok((classical + quantum).max(0.0))
}

/// Outcome of the quantum Cramér–Rao bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CramerRao {
    /// Variance lower bound `1/(M·G)`.
    Bound(f64),
    /// `G ≤ 0`: no information, the variance is unbounded.
    Unbounded,
}

pub fn cramer_rao_bound(g: f64, m: u64) -> Result<CramerRao> {
    if m == 0 {
        return Err(Error::invalid("number of repetitions must be at least 1"));
    }
    if g.is_nan() {
        return Err(Error::invalid("QFI is NaN"));
    }
    if g <= 0.0 {
        return Ok(CramerRao::Unbounded);
    }
    Ok(CramerRao::Bound(1.0 / (m as f64 * g)))
}
