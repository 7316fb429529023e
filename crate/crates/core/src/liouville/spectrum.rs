use super::VectorizedLiouvillian;
use crate::error::{Error, Result};
use crate::linalg::{c64, eig, inverse, unvec, vec, ComplexMatrix, DensityMatrix, VecState};

/// Rapidities with `|l| ≤ NULL_TOL` count as stationary.
pub const NULL_TOL: f64 = 1e-9;
/// Dense eigendecomposition is refused above this `D²`.
pub const SPECTRUM_MAX_DIM2: usize = 4096;
const PAIRING_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Mode {
    /// `l = −iω − Γ`.
    pub rapidity: c64,
    pub gamma: f64,
    pub omega: f64,
    pub right: VecState,
    /// Satisfies `⟨⟨left_α|right_β⟩⟩ = δ_αβ` unless the mode is flagged.
    pub left: VecState,
}

#[derive(Clone, Debug)]
pub struct LiouvillianSpectrum {
    pub modes: Vec<Mode>,
    /// Smallest decay rate over all modes but the stationary one.
    pub gap: f64,
    /// Indices of modes whose left/right pairing fell below tolerance; their
    /// left vectors are left at unit norm instead of being biorthonormalized.
    pub degenerate_modes: Vec<usize>,
}

impl LiouvillianSpectrum {
    pub fn null_modes(&self) -> Vec<usize> {
        (0..self.modes.len()).filter(|&k| self.modes[k].rapidity.norm() <= NULL_TOL).collect()
    }

    /// Largest deviation of `⟨⟨L_α|R_β⟩⟩` from `δ_αβ`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, ma) in self.modes.iter().enumerate() {
            for (b, mb) in self.modes.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ma.left.inner(&mb.right) - target).norm());
            }
        }
        worst
    }

    /// `ρ(t) = Σ_α c_α e^{l_α t} R_α` with `c_α = ⟨⟨L_α|ρ₀⟩⟩`.
    pub fn evolve(&self, rho0: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        let v0 = vec(rho0)?;
        let mut acc = vec![c64::new(0.0, 0.0); v0.dim2()];
        for m in &self.modes {
            let c = m.left.inner(&v0) * (m.rapidity * t).exp();
            for (a, r) in acc.iter_mut().zip(m.right.entries()) {
                *a += c * r;
            }
        }
        unvec(&VecState::new(acc)?, rho0.rows())
    }
}

pub fn spectrum(liou: &VectorizedLiouvillian) -> Result<LiouvillianSpectrum> {
    let n = liou.dim2();
    if n > SPECTRUM_MAX_DIM2 {
        return Err(Error::Unsupported(format!("dense spectrum refused for D² = {n} > {SPECTRUM_MAX_DIM2}")));
    }
    let (values, mut right) = eig(&liou.generator())?;

    // phase convention: largest-magnitude component real and positive
    for j in 0..n {
        let mut best = 0;
        for i in 1..n {
            if right[(i, j)].norm() > right[(best, j)].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let pivot = right[(best, j)];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            for i in 0..n {
                right[(i, j)] *= phase;
            }
        }
    }

    let mut degenerate = Vec::new();
    let left_rows = match inverse(&right) {
        Ok(inv) => Some(inv),
        Err(_) => {
            degenerate.extend(0..n);
            None
        }
    };

    let mut modes = Vec::with_capacity(n);
    for (a, &l) in values.iter().enumerate() {
        let r = VecState::new((0..n).map(|i| right[(i, a)]).collect())?;
        let left = match &left_rows {
            Some(inv) => {
                let row: Vec<c64> = (0..n).map(|i| inv[(a, i)].conj()).collect();
                let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                // with unit-norm vectors, |⟨⟨L|R⟩⟩| = 1/‖row‖
                if 1.0 / norm < PAIRING_TOL {
                    degenerate.push(a);
                    VecState::new(row.iter().map(|z| z / norm).collect())?
                } else {
                    VecState::new(row)?
                }
            }
            None => VecState::new(vec![c64::new(0.0, 0.0); n])?,
        };
        modes.push(Mode { rapidity: l, gamma: -l.re, omega: -l.im, right: r, left });
    }

    let stationary = (0..n).min_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm())).unwrap_or(0);
    let gap = modes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != stationary)
        .map(|(_, m)| m.gamma)
        .fold(f64::INFINITY, f64::min);

    Ok(LiouvillianSpectrum { modes, gap, degenerate_modes: degenerate })
}

/// Unique stationary state from the null mode, renormalized to unit trace.
pub fn steady_state(liou: &VectorizedLiouvillian) -> Result<DensityMatrix> {
    let spec = spectrum(liou)?;
    let null = spec.null_modes();
    if null.len() != 1 {
        return Err(Error::AmbiguousSteadyState { null_dim: null.len() });
    }
    let m = unvec(&spec.modes[null[0]].right, liou.dim())?;
    let tr = m.trace();
    if tr.norm() < 1e-14 {
        return Err(Error::Numerical("null mode has vanishing trace".into()));
    }
    let rho = m.scale(tr.inv()).hermitian_part();
    let residual = liou.apply(&rho).max_abs();
    if residual > 1e-9 {
        return Err(Error::Numerical(format!("steady-state residual {residual:.3e} exceeds 1e-9")));
    }
    DensityMatrix::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::model::{collapse_dissipator_spec, NoiseKind, NoiseSpec};

    fn qubit(lambda: f64) -> VectorizedLiouvillian {
        let spec = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 1.0).unwrap(), 1).unwrap();
        VectorizedLiouvillian::new(pauli::x().scale_real(0.5), &spec, 1, lambda).unwrap()
    }

    #[test]
    fn single_qubit_rapidities() {
        let s = spectrum(&qubit(0.1)).unwrap();
        let im = (1.0f64 - 0.01).sqrt();
        let expected = [c64::new(0.0, 0.0), c64::new(-0.1, -im), c64::new(-0.1, im), c64::new(-0.2, 0.0)];
        for (m, e) in s.modes.iter().zip(expected) {
            assert!((m.rapidity - e).norm() < 1e-9, "{} vs {e}", m.rapidity);
        }
        assert!((s.gap - 0.1).abs() < 1e-9);
        assert!(s.biorthonormality_defect() < 1e-8);
        assert!(s.degenerate_modes.is_empty());
        assert_eq!(s.null_modes(), vec![0]);
    }

    #[test]
    fn right_vectors_phase_fixed() {
        let s = spectrum(&qubit(0.3)).unwrap();
        for m in &s.modes {
            let e = m.right.entries();
            let best = e.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = e.iter().find(|z| z.norm() >= best * (1.0 - 1e-12)).unwrap();
            assert!(pivot.im.abs() < 1e-12 && pivot.re > 0.0);
        }
    }

    #[test]
    fn steady_state_is_mixed() {
        let ss = steady_state(&qubit(0.1)).unwrap();
        assert!(ss.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-10);
        match steady_state(&qubit(0.0)) {
            Err(Error::AmbiguousSteadyState { null_dim }) => assert!(null_dim > 1),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn spectral_reconstruction() {
        let liou = qubit(0.25);
        let s = spectrum(&liou).unwrap();
        let rho0 = ComplexMatrix::from_real_rows(&[&[0.3, 0.2], &[0.2, 0.7]]).unwrap();
        let t = 4.5;
        let direct = crate::linalg::expm(&liou.generator().scale_real(t)).unwrap();
        let v = &direct * &vec(&rho0).unwrap().as_column();
        let via_modes = vec(&s.evolve(&rho0, t).unwrap()).unwrap().as_column();
        assert!(v.max_abs_diff(&via_modes) < 1e-12);
    }
}
