use rayon::prelude::*;
use serde::Serialize;

use super::experiment::Experiment;
use super::pipeline::{ProbePipeline, QfiRecord};
use crate::error::{Error, Result};
use crate::model::{BlochState, IsingChainSpec, NoiseKind};

/// `G_corr` at or below this leaves `δG` undefined.
pub const DELTA_G_FLOOR: f64 = 1e-300;

/// Named collapse-rate intervals, in units of `J`.
pub const LAMBDA_PRESETS: [(&str, f64, f64); 4] =
    [("I1", 0.1, 0.5), ("I2", 1e-3, 1e-1), ("I3", 1e-5, 1e-3), ("I4", 1e-7, 1e-5)];
pub const PRESET_POINTS: usize = 20;

/// Reference optimal times `J·t_opt`, rows `λ/J ∈ {1e-1, 1e-3, 1e-5, 1e-7}`,
/// columns `N = 2..=5`.
pub const REFERENCE_T_OPT: [(f64, [f64; 4]); 4] = [
    (1e-1, [7.19, 9.53, 8.19, 8.86]),
    (1e-3, [771.0, 524.0, 376.0, 241.0]),
    (1e-5, [951.0, 922.0, 684.0, 993.0]),
    (1e-7, [951.0, 746.0, 684.0, 993.0]),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    LambdaScan,
    HScan,
    SizeScan,
    DeltaGScan,
}

/// How the interrogation time of a scan is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeChoice {
    Fixed(f64),
    /// `t_opt` at the smallest λ of the scan, then frozen.
    OptimalAtLambdaMin,
    /// `t_opt` re-derived at every grid point.
    PerPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSeries {
    pub label: String,
    /// Frozen time, or `None` when re-derived per point.
    pub t_used: Option<f64>,
    pub records: Vec<QfiRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub kind: ScanKind,
    pub grid: Vec<f64>,
    pub experiment: Experiment,
    pub probe: BlochState,
    pub series: Vec<ScanSeries>,
    /// `(G_corr − G_uncorr)/G_corr` per grid point, `None` where undefined.
    pub delta_g: Option<Vec<Option<f64>>>,
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite() && n >= 2) {
        return Err(Error::invalid(format!("log grid needs 0 < lo < hi and n >= 2, got [{lo}, {hi}] n={n}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo && lo.is_finite() && hi.is_finite() && n >= 2) {
        return Err(Error::invalid(format!("linear grid needs lo < hi and n >= 2, got [{lo}, {hi}] n={n}")));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

pub fn preset_grid(name: &str) -> Result<Vec<f64>> {
    let (_, lo, hi) = LAMBDA_PRESETS
        .iter()
        .find(|p| p.0.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::invalid(format!("unknown λ preset {name:?} (expected I1..I4)")))?;
    log_grid(*lo, *hi, PRESET_POINTS)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("scan grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("scan grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Search window for `t_opt`: `[0, min(1000, 10/λ)]/J` for chains and
/// `[0.1, 100]/ω0` for the two-qubit model.
pub fn t_window(experiment: &Experiment, lambda: f64) -> (f64, f64) {
    match experiment {
        Experiment::TwoQubit { omega0, .. } => (0.1 / omega0, 100.0 / omega0),
        Experiment::IsingChain { chain, .. } => {
            let span = if lambda > 0.0 { (10.0 / lambda).min(1000.0) } else { 1000.0 };
            (0.0, span / chain.j)
        }
    }
}

/// Sampling step of the `t_opt` search for a window.
pub fn t_step(window: (f64, f64)) -> f64 {
    if window.1 - window.0 <= 100.0 { 0.05 } else { 0.1 }
}

/// `t_opt` over the default window of the experiment.
pub fn optimal_time(pipeline: &ProbePipeline, lambda: f64) -> Result<f64> {
    let w = t_window(pipeline.experiment(), lambda);
    Ok(pipeline.find_t_opt(lambda, w, t_step(w))?.t_opt)
}

fn resolve_time(pipeline: &ProbePipeline, lambda_min: f64, time: TimeChoice) -> Result<Option<f64>> {
    match time {
        TimeChoice::Fixed(t) => Ok(Some(t)),
        TimeChoice::OptimalAtLambdaMin => optimal_time(pipeline, lambda_min).map(Some),
        TimeChoice::PerPoint => Ok(None),
    }
}

fn qfi_point(pipeline: &ProbePipeline, lambda: f64, t: Option<f64>) -> Result<QfiRecord> {
    let t = match t {
        Some(t) => t,
        None => optimal_time(pipeline, lambda)?,
    };
    pipeline.qfi_at(lambda, t)
}

fn lambda_series(pipeline: &ProbePipeline, grid: &[f64], t: Option<f64>) -> Result<Vec<QfiRecord>> {
    grid.par_iter().map(|&l| qfi_point(pipeline, l, t)).collect()
}

/// QFI over a λ grid at one interrogation time.
pub fn lambda_scan(experiment: &Experiment, probe: BlochState, grid: &[f64], time: TimeChoice) -> Result<ScanResult> {
    check_grid(grid)?;
    let pipeline = ProbePipeline::new(experiment, probe)?;
    let t_used = resolve_time(&pipeline, grid[0], time)?;
    let records = lambda_series(&pipeline, grid, t_used)?;
    Ok(ScanResult {
        kind: ScanKind::LambdaScan,
        grid: grid.to_vec(),
        experiment: *experiment,
        probe,
        series: vec![ScanSeries { label: "G".into(), t_used, records }],
        delta_g: None,
    })
}

fn chain_of(experiment: &Experiment) -> Result<IsingChainSpec> {
    match experiment {
        Experiment::IsingChain { chain, .. } => Ok(*chain),
        Experiment::TwoQubit { .. } => Err(Error::invalid("scan needs an Ising-chain experiment")),
    }
}

/// QFI versus the transverse field `h` (grid in units of `J`) at fixed λ.
/// The time is resolved once on the experiment's own `h`.
pub fn h_scan(
    experiment: &Experiment,
    probe: BlochState,
    lambda: f64,
    h_grid: &[f64],
    time: TimeChoice,
) -> Result<ScanResult> {
    check_grid(h_grid)?;
    let chain = chain_of(experiment)?;
    let t_used = resolve_time(&ProbePipeline::new(experiment, probe)?, lambda, time)?;
    let records = h_grid
        .par_iter()
        .map(|&h| {
            let exp = experiment.with_chain(IsingChainSpec::new(chain.n_sites, h * chain.j, chain.j)?);
            qfi_point(&ProbePipeline::new(&exp, probe)?, lambda, t_used)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        kind: ScanKind::HScan,
        grid: h_grid.to_vec(),
        experiment: *experiment,
        probe,
        series: vec![ScanSeries { label: "G".into(), t_used, records }],
        delta_g: None,
    })
}

/// One λ series per chain length, each with its own time choice.
pub fn size_scan(
    experiment: &Experiment,
    probe: BlochState,
    sizes: &[usize],
    lambda_grid: &[f64],
    time: TimeChoice,
) -> Result<ScanResult> {
    check_grid(lambda_grid)?;
    if sizes.is_empty() || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("chain sizes must be non-empty and strictly increasing"));
    }
    let chain = chain_of(experiment)?;
    let series = sizes
        .iter()
        .map(|&n| {
            let exp = experiment.with_chain(IsingChainSpec::new(n, chain.h, chain.j)?);
            let pipeline = ProbePipeline::new(&exp, probe)?;
            let t_used = resolve_time(&pipeline, lambda_grid[0], time)?;
            let records = lambda_series(&pipeline, lambda_grid, t_used)?;
            Ok(ScanSeries { label: format!("N={n}"), t_used, records })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        kind: ScanKind::SizeScan,
        grid: lambda_grid.to_vec(),
        experiment: *experiment,
        probe,
        series,
        delta_g: None,
    })
}

/// Relative QFI change from correlated noise, `(G_corr − G_uncorr)/G_corr`.
/// Both models share one time, resolved on the local model.
pub fn delta_g_scan(
    experiment: &Experiment,
    probe: BlochState,
    grid: &[f64],
    time: TimeChoice,
) -> Result<ScanResult> {
    check_grid(grid)?;
    let (correlated, local) = match experiment {
        Experiment::IsingChain { noise: noise @ NoiseKind::Correlated { .. }, .. } => {
            (experiment.with_noise(*noise), experiment.with_noise(NoiseKind::Local))
        }
        _ => return Err(Error::invalid("δG scan needs an Ising chain with correlated noise")),
    };
    let p_local = ProbePipeline::new(&local, probe)?;
    let p_corr = ProbePipeline::new(&correlated, probe)?;
    let t_used = resolve_time(&p_local, grid[0], time)?;
    let pairs = grid
        .par_iter()
        .map(|&l| {
            let t = match t_used {
                Some(t) => t,
                None => optimal_time(&p_local, l)?,
            };
            Ok((p_corr.qfi_at(l, t)?, p_local.qfi_at(l, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let delta_g = pairs
        .iter()
        .map(|(c, u)| (c.g_value > DELTA_G_FLOOR).then(|| (c.g_value - u.g_value) / c.g_value))
        .collect();
    let (corr, unc): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(ScanResult {
        kind: ScanKind::DeltaGScan,
        grid: grid.to_vec(),
        experiment: *experiment,
        probe,
        series: vec![
            ScanSeries { label: "G_corr".into(), t_used, records: corr },
            ScanSeries { label: "G_uncorr".into(), t_used, records: unc },
        ],
        delta_g: Some(delta_g),
    })
}

/// Reference `J·t_opt` for `(λ/J, N)`, if tabulated.
pub fn reference_t_opt(lambda: f64, n_sites: usize) -> Option<f64> {
    let col = n_sites.checked_sub(2).filter(|c| *c < 4)?;
    REFERENCE_T_OPT
        .iter()
        .find(|(l, _)| ((l - lambda) / l).abs() < 1e-9)
        .map(|(_, row)| row[col])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = log_grid(1e-5, 1e-3, 3).unwrap();
        assert_eq!(g[0], 1e-5);
        assert!((g[1] - 1e-4).abs() < 1e-18);
        assert_eq!(g[2], 1e-3);
        assert_eq!(preset_grid("I3").unwrap().len(), PRESET_POINTS);
        assert!(preset_grid("I9").is_err());
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert_eq!(linear_grid(0.0, 1.0, 5).unwrap()[2], 0.5);
        assert!(check_grid(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn reference_lookup() {
        assert_eq!(reference_t_opt(1e-5, 4), Some(684.0));
        assert_eq!(reference_t_opt(1e-1, 2), Some(7.19));
        assert_eq!(reference_t_opt(1e-2, 2), None);
        assert_eq!(reference_t_opt(1e-3, 6), None);
    }
}
