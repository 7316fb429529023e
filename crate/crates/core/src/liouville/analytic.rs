//! Closed-form solution of the single-qubit collapse master equation with
//! `H = (ω0/2)σˣ`.
//!
//! The 4×4 generator has rapidities `0`, `−2λ` and `−λ ± √(λ² − ω0²)` with
//! right eigenvectors
//!   `R₀ = (1, 0, 0, 1)`, `R₁ = (0, 1, 1, 0)`,
//!   `R± = (−ω0, −i l±, i l±, ω0)/ω0`.

use crate::error::{Error, Result};
use crate::linalg::{c64, inverse, unvec, vec, ComplexMatrix, DensityMatrix, VecState};

pub fn analytic_single_qubit(omega0: f64, lambda: f64, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(Error::invalid("analytic solution needs a qubit state"));
    }
    if !(omega0 > 0.0 && omega0.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("need omega0 > 0 and lambda ≥ 0"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be finite and non-negative, got {t}")));
    }
    if (lambda - omega0).abs() <= 1e-12 * omega0 {
        return Err(Error::Unsupported("lambda = omega0 is an exceptional point (defective generator)".into()));
    }
    let (values, right) = eigensystem(omega0, lambda);
    let coeffs = inverse(&right)?;
    let v0 = vec(rho0.matrix())?;
    let mut out = [c64::new(0.0, 0.0); 4];
    for (a, l) in values.iter().enumerate() {
        let c: c64 = (0..4).map(|i| coeffs[(a, i)] * v0.entries()[i]).sum::<c64>() * (l * t).exp();
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * right[(i, a)];
        }
    }
    let rho = unvec(&VecState::new(out.to_vec())?, 2)?;
    DensityMatrix::from_numerical(rho)
}

/// Rapidities and right eigenvectors (as columns).
pub(crate) fn eigensystem(omega0: f64, lambda: f64) -> ([c64; 4], ComplexMatrix) {
    let root = c64::new(lambda * lambda - omega0 * omega0, 0.0).sqrt();
    let lp = -lambda + root;
    let lm = -lambda - root;
    let i = c64::new(0.0, 1.0);
    let w = c64::new(omega0, 0.0);
    let zero = c64::new(0.0, 0.0);
    let one = c64::new(1.0, 0.0);
    let mode = |l: c64| [-one, -i * l / w, i * l / w, one];
    let cols = [[one, zero, zero, one], [zero, one, one, zero], mode(lp), mode(lm)];
    let right = ComplexMatrix::from_fn(4, 4, |r, c| cols[c][r]);
    ([zero, c64::new(-2.0 * lambda, 0.0), lp, lm], right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::VectorizedLiouvillian;
    use crate::linalg::pauli;
    use crate::model::{collapse_dissipator_spec, NoiseKind, NoiseSpec};

    fn up() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::diagonal(&[c64::new(0.0, 0.0), c64::new(1.0, 0.0)])).unwrap()
    }

    #[test]
    fn eigenpairs_solve_the_generator() {
        for (omega, lambda) in [(1.0, 0.1), (1.0, 2.5), (0.7, 0.0)] {
            let spec = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 1.0).unwrap(), 1).unwrap();
            let liou = VectorizedLiouvillian::new(pauli::x().scale_real(omega / 2.0), &spec, 1, lambda).unwrap();
            let l = liou.generator();
            let (vals, r) = eigensystem(omega, lambda);
            for a in 0..4 {
                let col = ComplexMatrix::from_fn(4, 1, |i, _| r[(i, a)]);
                let lhs = &l * &col;
                assert!(lhs.max_abs_diff(&col.scale(vals[a])) < 1e-14);
            }
        }
    }

    #[test]
    fn relaxes_to_mixed_state() {
        let lambda = 0.1;
        let rho = analytic_single_qubit(1.0, lambda, &up(), 1e3 / lambda).unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-8);
    }

    #[test]
    fn unitary_precession() {
        // λ = 0: τ_z(t) = cos(ω0 t) from |1⟩
        for t in [0.0, 0.4, 2.0, 9.0] {
            let rho = analytic_single_qubit(1.0, 0.0, &up(), t).unwrap();
            let tz = rho.bloch_vector().unwrap()[2];
            assert!((tz - t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn exceptional_point_rejected() {
        assert!(matches!(analytic_single_qubit(1.0, 1.0, &up(), 1.0), Err(Error::Unsupported(_))));
    }
}
