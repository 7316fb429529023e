use std::f64::consts::PI;

use serde::Serialize;

use super::pipeline::ProbePipeline;
use crate::error::{Error, Result};
use crate::model::BlochState;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Simplex diameter, in unit-square coordinates, that ends a run.
pub const SIMPLEX_TOL: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 500;
pub const GRID_T: usize = 64;
pub const GRID_THETA: usize = 32;
/// Unit-square starting points of the restarts.
const SEEDS: [[f64; 2]; 5] = [[0.5, 0.5], [0.2, 0.8], [0.8, 0.8], [0.2, 0.2], [0.8, 0.2]];
const INITIAL_STEP: f64 = 0.1;
/// Grid maxima at or below this count as an information-free landscape.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub t_opt: f64,
    pub theta_opt: f64,
    pub g_max: f64,
    /// Iterations summed over all restarts.
    pub n_iterations: usize,
    pub converged: bool,
    pub simplex_tolerance: f64,
    /// Largest `G` on the dense cross-validation grid.
    pub grid_max: f64,
    /// `G` vanishes on the whole grid, so the argmax carries no information.
    pub degenerate: bool,
}

/// Outcome of one Nelder–Mead run.
#[derive(Clone, Copy, Debug)]
pub struct NelderMeadRun {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from an axis-aligned initial simplex at `x0`.
pub fn nelder_mead(mut f: impl FnMut([f64; 2]) -> Result<f64>, x0: [f64; 2], step: f64) -> Result<NelderMeadRun> {
    let mut simplex = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut values = [f(simplex[0])?, f(simplex[1])?, f(simplex[2])?];
    let lerp = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        if diameter(&simplex) < SIMPLEX_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let worst = simplex[2];
        let xr = lerp(centroid, worst, -REFLECT);
        let fr = f(xr)?;
        if fr < values[0] {
            let xe = lerp(centroid, worst, -EXPAND);
            let fe = f(xe)?;
            (simplex[2], values[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < values[1] {
            (simplex[2], values[2]) = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < values[2] {
            let xc = lerp(centroid, xr, CONTRACT);
            (xc, f(xc)?)
        } else {
            let xc = lerp(centroid, worst, CONTRACT);
            (xc, f(xc)?)
        };
        if fc < values[2].min(fr) {
            (simplex[2], values[2]) = (xc, fc);
            continue;
        }
        for k in 1..3 {
            simplex[k] = lerp(simplex[0], simplex[k], SHRINK);
            values[k] = f(simplex[k])?;
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Ok(NelderMeadRun { x: simplex[best], value: values[best], iterations, converged })
}

fn diameter(s: &[[f64; 2]; 3]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    d(s[0], s[1]).max(d(s[0], s[2])).max(d(s[1], s[2]))
}

/// Maximizes `G(t, θ)` over `t ∈ t_window`, `θ ∈ [0, π]` at fixed `φ`.
///
/// Five restarts run on the unit square; points outside it score `+∞` in the
/// minimized `−G`. The best result is checked against a 64×32 grid, and if
/// the grid wins by more than 1% one more run starts from the grid argmax.
pub fn optimize_t_theta(
    pipeline: &ProbePipeline,
    lambda: f64,
    t_window: (f64, f64),
    phi: f64,
) -> Result<OptimizationResult> {
    let (t_lo, t_hi) = t_window;
    if !(t_lo >= 0.0 && t_hi > t_lo && t_hi.is_finite()) {
        return Err(Error::invalid(format!("invalid time window [{t_lo}, {t_hi}]")));
    }
    let to_phys = |u: [f64; 2]| (t_lo + u[0] * (t_hi - t_lo), u[1] * PI);
    let objective = |u: [f64; 2]| -> Result<f64> {
        if !(0.0..=1.0).contains(&u[0]) || !(0.0..=1.0).contains(&u[1]) {
            return Ok(f64::INFINITY);
        }
        let (t, theta) = to_phys(u);
        let p = pipeline.with_probe(BlochState::new(theta, phi)?)?;
        Ok(-p.qfi_at(lambda, t)?.g_value)
    };

    let mut best: Option<NelderMeadRun> = None;
    let mut n_iterations = 0;
    let mut all_converged = true;
    let mut consider = |run: NelderMeadRun, best: &mut Option<NelderMeadRun>| {
        n_iterations += run.iterations;
        all_converged &= run.converged;
        if best.is_none_or(|b| run.value < b.value) {
            *best = Some(run);
        }
    };
    for seed in SEEDS {
        consider(nelder_mead(objective, seed, INITIAL_STEP)?, &mut best);
    }

    let (grid_max, grid_arg) = grid_maximum(pipeline, lambda, t_window, phi)?;
    let g_best = best.map_or(0.0, |b| -b.value);
    if grid_max * 0.99 > g_best {
        let u0 = [(grid_arg.0 - t_lo) / (t_hi - t_lo), grid_arg.1 / PI];
        // shrink the first step so the simplex stays inside the square
        let step = INITIAL_STEP.min(1.0 - u0[0]).min(1.0 - u0[1]).max(1.0 / GRID_T as f64);
        let u0 = [u0[0].min(1.0 - step), u0[1].min(1.0 - step)];
        consider(nelder_mead(objective, u0, step)?, &mut best);
    }
    let best = best.expect("at least one restart ran");
    let (mut t_opt, mut theta_opt) = to_phys(best.x);
    let mut g_max = (-best.value).max(0.0);
    if grid_max > g_max {
        (t_opt, theta_opt, g_max) = (grid_arg.0, grid_arg.1, grid_max);
    }
    let degenerate = grid_max <= DEGENERATE_TOL && g_max <= DEGENERATE_TOL;
    Ok(OptimizationResult {
        t_opt,
        theta_opt,
        g_max,
        n_iterations,
        converged: all_converged || degenerate,
        simplex_tolerance: SIMPLEX_TOL,
        grid_max,
        degenerate,
    })
}

/// Largest `G` on the 64×32 grid and its `(t, θ)`.
pub fn grid_maximum(
    pipeline: &ProbePipeline,
    lambda: f64,
    t_window: (f64, f64),
    phi: f64,
) -> Result<(f64, (f64, f64))> {
    let (t_lo, t_hi) = t_window;
    let times: Vec<f64> =
        (0..GRID_T).map(|i| t_lo + (t_hi - t_lo) * i as f64 / (GRID_T - 1) as f64).collect();
    let mut best = (f64::NEG_INFINITY, (times[0], 0.0));
    for j in 0..GRID_THETA {
        let theta = PI * j as f64 / (GRID_THETA - 1) as f64;
        let p = pipeline.with_probe(BlochState::new(theta, phi)?)?;
        for rec in p.qfi_series(lambda, &times)? {
            if rec.g_value > best.0 {
                best = (rec.g_value, (rec.t, theta));
            }
        }
    }
    Ok(best)
}
