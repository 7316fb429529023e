use super::ode::Dop853;
use super::VectorizedLiouvillian;
use crate::error::{Error, Result};
use crate::linalg::{c64, expm, expm_frechet, unvec, vec, ComplexMatrix, DensityMatrix, VecState};

/// Largest `D²` propagated with the dense exponential under [`Backend::Auto`].
pub const DENSE_MAX_DIM2: usize = 1024;
const DENSE_HARD_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Dense exponential up to [`DENSE_MAX_DIM2`], ODE above.
    Auto,
    Dense,
    Ode,
}

impl Backend {
    fn resolve(self, dim2: usize) -> Result<Backend> {
        match self {
            Backend::Auto if dim2 <= DENSE_MAX_DIM2 => Ok(Backend::Dense),
            Backend::Auto => Ok(Backend::Ode),
            Backend::Dense if dim2 > DENSE_HARD_LIMIT => {
                Err(Error::Unsupported(format!("dense propagation refused for D² = {dim2} > {DENSE_HARD_LIMIT}")))
            }
            b => Ok(b),
        }
    }
}

fn check(liou: &VectorizedLiouvillian, rho0: &ComplexMatrix, t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("propagation time must be finite and non-negative, got {t}")));
    }
    if rho0.rows() != liou.dim() || !rho0.is_square() {
        return Err(Error::invalid(format!(
            "state dimension {} does not match generator dimension {}",
            rho0.rows(),
            liou.dim()
        )));
    }
    Ok(())
}

pub fn propagate(liou: &VectorizedLiouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    propagate_with(liou, rho0, t, Backend::Auto)
}

pub fn propagate_with(liou: &VectorizedLiouvillian, rho0: &DensityMatrix, t: f64, backend: Backend) -> Result<DensityMatrix> {
    check(liou, rho0.matrix(), t)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let d = liou.dim();
    let rho = match backend.resolve(liou.dim2())? {
        Backend::Dense => {
            let prop = expm(&liou.generator().scale_real(t))?;
            let v = &prop * &vec(rho0.matrix())?.as_column();
            unvec(&VecState::from_column(&v)?, d)?
        }
        _ => {
            let f = |x: &[c64], out: &mut [c64]| liou.apply_into(x, out, liou.lambda(), None);
            let mut ode = Dop853::new(f, rho0.matrix().col_major());
            ode.advance_to(t)?;
            ComplexMatrix::from_col_major(d, d, ode.state())?
        }
    };
    DensityMatrix::from_numerical(rho)
}

/// `(ρ(t), ∂_λρ(t))` for a λ-independent initial state.
pub fn propagate_with_lambda_derivative(
    liou: &VectorizedLiouvillian,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<(DensityMatrix, ComplexMatrix)> {
    propagate_with_lambda_derivative_using(liou, rho0, t, Backend::Auto)
}

pub fn propagate_with_lambda_derivative_using(
    liou: &VectorizedLiouvillian,
    rho0: &DensityMatrix,
    t: f64,
    backend: Backend,
) -> Result<(DensityMatrix, ComplexMatrix)> {
    let zero = ComplexMatrix::zeros(rho0.dim(), rho0.dim());
    let (rho, drho) = propagate_pair(liou, rho0.matrix(), &zero, t, backend)?;
    Ok((DensityMatrix::from_numerical(rho)?, drho))
}

/// Propagates `(ρ, ∂_λρ)` jointly under
/// `d/dt (ρ, ∂ρ) = (L̂ρ, L̂∂ρ + L̂_D ρ)`. The derivative is returned Hermitian.
pub(crate) fn propagate_pair(
    liou: &VectorizedLiouvillian,
    rho: &ComplexMatrix,
    drho: &ComplexMatrix,
    t: f64,
    backend: Backend,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check(liou, rho, t)?;
    if drho.rows() != rho.rows() || !drho.is_square() {
        return Err(Error::invalid("derivative dimension does not match state"));
    }
    if t == 0.0 {
        return Ok((rho.clone(), drho.hermitian_part()));
    }
    let d = liou.dim();
    let (r, dr) = match backend.resolve(liou.dim2())? {
        Backend::Dense => {
            let (prop, sens) = expm_frechet(&liou.generator().scale_real(t), &liou.l_dissipative_unit().scale_real(t))?;
            let v = vec(rho)?.as_column();
            let dv = vec(drho)?.as_column();
            let r = &prop * &v;
            let dr = &(&prop * &dv) + &(&sens * &v);
            (unvec(&VecState::from_column(&r)?, d)?, unvec(&VecState::from_column(&dr)?, d)?)
        }
        _ => {
            let mut ode = pair_integrator(liou, rho, drho);
            ode.advance_to(t)?;
            split_pair(ode.state(), d)?
        }
    };
    Ok((r, dr.hermitian_part()))
}

fn pair_integrator<'a>(
    liou: &'a VectorizedLiouvillian,
    rho: &ComplexMatrix,
    drho: &ComplexMatrix,
) -> Dop853<impl FnMut(&[c64], &mut [c64]) + 'a> {
    let n = liou.dim2();
    let lambda = liou.lambda();
    let f = move |y: &[c64], out: &mut [c64]| {
        let (x, dx) = y.split_at(n);
        let (ox, odx) = out.split_at_mut(n);
        liou.apply_into(x, ox, lambda, None);
        liou.apply_into(dx, odx, lambda, Some(x));
    };
    let mut y0 = rho.col_major();
    y0.extend(drho.col_major());
    Dop853::new(f, y0)
}

fn split_pair(y: &[c64], d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (x, dx) = y.split_at(d * d);
    Ok((ComplexMatrix::from_col_major(d, d, x)?, ComplexMatrix::from_col_major(d, d, dx)?))
}

/// `(ρ(tₖ), ∂_λρ(tₖ))` at non-decreasing sample times from one adaptive
/// integration. States are returned as Hermitian matrices without the
/// density-matrix validation, for cheap dense time sampling.
pub fn sample_with_lambda_derivative(
    liou: &VectorizedLiouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<(ComplexMatrix, ComplexMatrix)>> {
    let mut out = Vec::with_capacity(times.len());
    visit_samples(liou, rho0.matrix(), times, |_, r, dr| {
        out.push((r, dr));
        Ok(())
    })?;
    Ok(out)
}

/// Streams `(k, ρ(tₖ), ∂_λρ(tₖ))` to `visit` while integrating once.
pub(crate) fn visit_samples(
    liou: &VectorizedLiouvillian,
    rho0: &ComplexMatrix,
    times: &[f64],
    mut visit: impl FnMut(usize, ComplexMatrix, ComplexMatrix) -> Result<()>,
) -> Result<()> {
    check(liou, rho0, 0.0)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("sample times must be finite, non-negative and non-decreasing"));
    }
    let d = liou.dim();
    let zero = ComplexMatrix::zeros(d, d);
    let mut ode = pair_integrator(liou, rho0, &zero);
    for (k, &t) in times.iter().enumerate() {
        ode.advance_to(t)?;
        let (r, dr) = split_pair(ode.state(), d)?;
        visit(k, r.hermitian_part(), dr.hermitian_part())?;
    }
    Ok(())
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

    fn up() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::diagonal(&[c64::new(0.0, 0.0), c64::new(1.0, 0.0)])).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let liou = qubit(0.1);
        assert_eq!(propagate(&liou, &up(), 0.0).unwrap(), up());
        let (r, d) = propagate_with_lambda_derivative(&liou, &up(), 0.0).unwrap();
        assert_eq!(r, up());
        assert_eq!(d.max_abs(), 0.0);
        assert!(propagate(&liou, &up(), -1.0).is_err());
    }

    #[test]
    fn backends_agree() {
        let liou = qubit(0.1);
        for t in [0.3, 7.0, 50.0] {
            let a = propagate_with(&liou, &up(), t, Backend::Dense).unwrap();
            let b = propagate_with(&liou, &up(), t, Backend::Ode).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-8);
            let (ra, da) = propagate_with_lambda_derivative_using(&liou, &up(), t, Backend::Dense).unwrap();
            let (rb, db) = propagate_with_lambda_derivative_using(&liou, &up(), t, Backend::Ode).unwrap();
            assert!(ra.matrix().max_abs_diff(rb.matrix()) < 1e-8);
            assert!(da.max_abs_diff(&db) < 1e-8);
        }
    }

    #[test]
    fn unitary_limit_conserves_purity() {
        let liou = qubit(0.0);
        for t in [1.0, 10.0, 100.0] {
            let r = propagate(&liou, &up(), t).unwrap();
            assert!((r.purity() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let lambda = 0.01;
        let liou = qubit(lambda);
        let t = 12.0;
        let (_, d) = propagate_with_lambda_derivative(&liou, &up(), t).unwrap();
        let step = 1e-6;
        let plus = propagate(&liou.with_lambda(lambda + step).unwrap(), &up(), t).unwrap();
        let minus = propagate(&liou.with_lambda(lambda - step).unwrap(), &up(), t).unwrap();
        let fd = (plus.matrix() - minus.matrix()).scale_real(0.5 / step);
        assert!(d.max_abs_diff(&fd) < 1e-6);
        assert!(d.trace().norm() < 1e-10);
        assert!(d.is_hermitian(1e-9));
    }

    #[test]
    fn samples_match_single_shots() {
        let liou = qubit(0.2);
        let times = [0.0, 0.5, 0.5, 3.0, 9.0];
        let samples = sample_with_lambda_derivative(&liou, &up(), &times).unwrap();
        for (t, (r, d)) in times.iter().zip(&samples) {
            let (r1, d1) = propagate_with_lambda_derivative_using(&liou, &up(), *t, Backend::Dense).unwrap();
            assert!(r.max_abs_diff(r1.matrix()) < 1e-9);
            assert!(d.max_abs_diff(&d1) < 1e-9);
        }
        assert!(sample_with_lambda_derivative(&liou, &up(), &[1.0, 0.5]).is_err());
    }
}
