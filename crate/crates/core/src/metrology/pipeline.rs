use serde::Serialize;

use super::experiment::Experiment;
use super::qfi::qfi_qubit;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_matrix, ComplexMatrix, DensityMatrix};
use crate::liouville::{propagate_pair, visit_samples, Backend, VectorizedLiouvillian};
use crate::model::BlochState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiMethod {
    QubitFormula,
    GeneralFormula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    ExactSensitivity,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiRecord {
    pub lambda: f64,
    pub t: f64,
    /// Quantum Fisher information `G(λ)`.
    pub g_value: f64,
    /// `Q_λ = λ²G`.
    pub q_value: f64,
    pub method: QfiMethod,
    pub derivative_source: DerivativeSource,
}

impl QfiRecord {
    fn new(lambda: f64, t: f64, g: f64, source: DerivativeSource) -> Self {
        Self {
            lambda,
            t,
            g_value: g,
            q_value: lambda * lambda * g,
            method: QfiMethod::QubitFormula,
            derivative_source: source,
        }
    }
}

/// Finite-difference cross-check of the exact sensitivity.
#[derive(Clone, Copy, Debug)]
pub struct FiniteDifferenceCheck {
    pub record: QfiRecord,
    pub step: f64,
    /// Relative change of `G` when the step is halved.
    pub halving_change: f64,
}

/// Optimal interrogation time from dense sampling plus local refinement.
#[derive(Clone, Debug)]
pub struct TimeOptimum {
    pub t_opt: f64,
    pub g_max: f64,
    /// Coarse `(t, G)` samples the search started from.
    pub samples: Vec<(f64, f64)>,
}

/// Experiment, probe preparation and cached generator, ready to evaluate the
/// probe's QFI at any `(λ, t)`.
#[derive(Clone, Debug)]
pub struct ProbePipeline {
    experiment: Experiment,
    probe: BlochState,
    rho0: DensityMatrix,
    base: VectorizedLiouvillian,
    backend: Backend,
}

impl ProbePipeline {
    pub fn new(experiment: &Experiment, probe: BlochState) -> Result<Self> {
        Ok(Self {
            experiment: *experiment,
            probe,
            rho0: experiment.initial_state(&probe)?,
            base: experiment.liouvillian(0.0)?,
            backend: Backend::Auto,
        })
    }

    /// Same experiment and cached generator, different probe preparation.
    pub fn with_probe(&self, probe: BlochState) -> Result<Self> {
        Ok(Self { probe, rho0: self.experiment.initial_state(&probe)?, ..self.clone() })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn experiment(&self) -> &Experiment {
        &self.experiment
    }

    pub fn probe(&self) -> &BlochState {
        &self.probe
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn liouvillian(&self, lambda: f64) -> Result<VectorizedLiouvillian> {
        self.base.with_lambda(lambda)
    }

    fn reduce(&self, rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<(DensityMatrix, ComplexMatrix)> {
        let dims = vec![2; self.experiment.n_qubits()];
        let keep = [self.experiment.probe_factor()];
        let r = DensityMatrix::from_numerical(partial_trace_matrix(rho, &dims, &keep)?)?;
        let dr = partial_trace_matrix(drho, &dims, &keep)?.hermitian_part();
        Ok((r, dr))
    }

    /// Probe state `ρ_p(t)` and `∂_λρ_p(t)`.
    pub fn reduced_at(&self, lambda: f64, t: f64) -> Result<(DensityMatrix, ComplexMatrix)> {
        let liou = self.liouvillian(lambda)?;
        let d = self.rho0.dim();
        let (rho, drho) = propagate_pair(&liou, self.rho0.matrix(), &ComplexMatrix::zeros(d, d), t, self.backend)?;
        self.reduce(&rho, &drho)
    }

    pub fn qfi_at(&self, lambda: f64, t: f64) -> Result<QfiRecord> {
        let (r, dr) = self.reduced_at(lambda, t)?;
        Ok(QfiRecord::new(lambda, t, qfi_qubit(&r, &dr)?, DerivativeSource::ExactSensitivity))
    }

    /// Central difference with `δλ = max(1e-8, 1e-3·λ)`, repeated at `δλ/2`.
    pub fn qfi_finite_difference(&self, lambda: f64, t: f64) -> Result<FiniteDifferenceCheck> {
        let step = (1e-3 * lambda).max(1e-8);
        let g = self.fd_qfi(lambda, t, step)?;
        let g_half = self.fd_qfi(lambda, t, step / 2.0)?;
        let scale = g.abs().max(g_half.abs());
        let halving_change = if scale > 0.0 { (g - g_half).abs() / scale } else { 0.0 };
        Ok(FiniteDifferenceCheck {
            record: QfiRecord::new(lambda, t, g_half, DerivativeSource::FiniteDifference),
            step,
            halving_change,
        })
    }

    fn fd_qfi(&self, lambda: f64, t: f64, step: f64) -> Result<f64> {
        let (lo, hi) = if lambda >= step { (lambda - step, lambda + step) } else { (lambda, lambda + step) };
        let (r_lo, _) = self.reduced_at(lo, t)?;
        let (r_hi, _) = self.reduced_at(hi, t)?;
        let (r, _) = self.reduced_at(lambda, t)?;
        let mut dr = (r_hi.matrix() - r_lo.matrix()).scale_real(1.0 / (hi - lo)).hermitian_part();
        // remove the O(ε) trace round-off of the difference quotient
        let tr = dr.trace().re / 2.0;
        dr = &dr - &ComplexMatrix::identity(2).scale_real(tr);
        qfi_qubit(&r, &dr)
    }

    /// QFI at non-decreasing times from a single integration.
    pub fn qfi_series(&self, lambda: f64, times: &[f64]) -> Result<Vec<QfiRecord>> {
        let liou = self.liouvillian(lambda)?;
        let mut out = Vec::with_capacity(times.len());
        visit_samples(&liou, self.rho0.matrix(), times, |k, rho, drho| {
            let (r, dr) = self.reduce(&rho, &drho)?;
            out.push(QfiRecord::new(lambda, times[k], qfi_qubit(&r, &dr)?, DerivativeSource::ExactSensitivity));
            Ok(())
        })?;
        Ok(out)
    }

    /// Maximizes `G(t)` over `[t_lo, t_hi]`: samples every `dt`, then refines
    /// the best local maxima by golden-section search restarted from the
    /// stored sample preceding each peak.
    pub fn find_t_opt(&self, lambda: f64, window: (f64, f64), dt: f64) -> Result<TimeOptimum> {
        let (t_lo, t_hi) = window;
        if !(t_lo >= 0.0 && t_hi > t_lo && t_hi.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("invalid time window [{t_lo}, {t_hi}] with step {dt}")));
        }
        let n = ((t_hi - t_lo) / dt).ceil() as usize;
        let times: Vec<f64> = (0..=n).map(|k| (t_lo + k as f64 * dt).min(t_hi)).collect();
        let liou = self.liouvillian(lambda)?;

        struct Sample {
            t: f64,
            g: f64,
            state: (ComplexMatrix, ComplexMatrix),
        }
        // last three samples and the best peaks found so far
        let mut recent: Vec<Sample> = Vec::with_capacity(3);
        let mut peaks: Vec<(f64, f64, f64, (ComplexMatrix, ComplexMatrix))> = Vec::new();
        let mut samples = Vec::with_capacity(times.len());
        const KEEP: usize = 3;

        let mut offer = |g: f64, t_start: f64, t_end: f64, state: (ComplexMatrix, ComplexMatrix)| {
            peaks.push((g, t_start, t_end, state));
            peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
            peaks.truncate(KEEP);
        };

        visit_samples(&liou, self.rho0.matrix(), &times, |k, rho, drho| {
            let (r, dr) = self.reduce(&rho, &drho)?;
            let g = qfi_qubit(&r, &dr)?;
            samples.push((times[k], g));
            if recent.len() == 3 {
                recent.remove(0);
            }
            recent.push(Sample { t: times[k], g, state: (rho, drho) });
            let m = recent.len();
            if m == 2 && recent[0].g > recent[1].g {
                // peak at the window start
                offer(recent[0].g, recent[0].t, recent[1].t, recent[0].state.clone());
            }
            if m == 3 && recent[1].g >= recent[0].g && recent[1].g >= recent[2].g && recent[1].g > 0.0 {
                offer(recent[1].g, recent[0].t, recent[2].t, recent[0].state.clone());
            }
            Ok(())
        })?;
        let m = recent.len();
        if m >= 2 && recent[m - 1].g > recent[m - 2].g {
            offer(recent[m - 1].g, recent[m - 2].t, recent[m - 1].t, recent[m - 2].state.clone());
        }

        let (mut best_t, mut best_g) =
            samples.iter().copied().fold((times[0], f64::NEG_INFINITY), |acc, s| if s.1 > acc.1 { s } else { acc });
        for (_, a, b, state) in &peaks {
            let (t, g) = self.golden_refine(&liou, state, *a, *b)?;
            if g > best_g {
                best_t = t;
                best_g = g;
            }
        }
        Ok(TimeOptimum { t_opt: best_t, g_max: best_g.max(0.0), samples })
    }

    fn golden_refine(
        &self,
        liou: &VectorizedLiouvillian,
        start: &(ComplexMatrix, ComplexMatrix),
        a: f64,
        b: f64,
    ) -> Result<(f64, f64)> {
        let eval = |t: f64| -> Result<f64> {
            let (rho, drho) = propagate_pair(liou, &start.0, &start.1, t - a, Backend::Ode)?;
            let (r, dr) = self.reduce(&rho, &drho)?;
            qfi_qubit(&r, &dr)
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (a, b);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        while hi - lo > 1e-6 * (1.0 + hi.abs()) {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = eval(x2)?;
            }
        }
        let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        for end in [a, b] {
            let g = eval(end)?;
            if g > best.1 {
                best = (end, g);
            }
        }
        Ok(best)
    }
}

/// One-shot QFI evaluation of the probe for `experiment` at `(λ, t)`.
pub fn probe_qfi_at(experiment: &Experiment, lambda: f64, t: f64, probe: &BlochState) -> Result<QfiRecord> {
    ProbePipeline::new(experiment, *probe)?.qfi_at(lambda, t)
}
