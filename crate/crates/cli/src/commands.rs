use std::f64::consts::PI;

use critprobe_core::liouville::{
    analytic_single_qubit, propagate_with, spectrum, sse_simulate, Backend, SseConfig, VectorizedLiouvillian,
};
use critprobe_core::metrology::{
    delta_g_scan, h_scan, lambda_scan, optimize_t_theta, reference_t_opt, size_scan, t_step, t_window, Experiment,
    ProbePipeline, ScanResult, TimeChoice, REFERENCE_T_OPT,
};
use critprobe_core::model::{bloch_pure_state, collapse_dissipator_spec, NoiseSpec, SingleQubitModel};
use critprobe_core::{BlochState, Error, IsingChainSpec, NoiseKind, ProbeCouplingSpec};
use serde_json::{json, Map, Value};

use crate::config::{Command, GridSpec, Reader};
use crate::error::CliError;
use crate::output::{Cell, Table};

const ANY: (f64, f64) = (f64::MIN, f64::MAX);
const POSITIVE: (f64, f64) = (f64::MIN_POSITIVE, f64::MAX);
const RATE: (f64, f64) = (0.0, 1e6);
const MAX_SITES: usize = 6;

/// What a command produced: the CSV table plus sidecar fields.
pub struct Output {
    pub stem: String,
    pub table: Table,
    pub units: Value,
    pub t_opt: Value,
    pub results: Value,
}

fn qubit_units() -> Value {
    json!({"energy": "omega0 = 1", "time": "1/omega0", "lambda": "omega0", "G": "1/omega0^2"})
}

fn chain_units() -> Value {
    json!({"energy": "J = 1", "time": "1/J", "lambda": "J", "h": "J", "G": "1/J^2"})
}

fn probe_state(r: &mut Reader, theta: f64, phi: f64) -> BlochState {
    let theta = r.f64_or("theta", theta, (0.0, PI));
    let phi = r.f64_or("phi", phi, (0.0, 2.0 * PI - f64::EPSILON));
    r.check(BlochState::new(theta, phi)).unwrap_or(BlochState { theta: 0.0, phi: 0.0 })
}

fn two_qubit(r: &mut Reader) -> Experiment {
    let omega_p = r.f64_or("omega_p", 0.3, POSITIVE);
    let g = r.f64_or("g", 0.2, ANY);
    let beta = r.f64_or("beta", 0.01, (0.0, 1e6));
    Experiment::TwoQubit { omega0: 1.0, omega_p, g, beta }
}

/// Chain experiment with the default probe coupling. `n_default = None`
/// leaves the chain length to the caller (size scans).
fn chain(r: &mut Reader, n_default: Option<usize>) -> Experiment {
    let h = r.f64_or("h", 1.0, POSITIVE);
    chain_at(r, n_default, h)
}

/// Same as [`chain`] with `h` supplied by the caller.
fn chain_at(r: &mut Reader, n_default: Option<usize>, h: f64) -> Experiment {
    let n = n_default.map_or(2, |d| r.usize_or("N", d, (1, MAX_SITES)));
    let h_p = r.f64_or("h_p", 0.5, ANY);
    let j_p = r.f64_or("J_p", 0.5, ANY);
    let beta = r.f64_or("beta", 0.1, (0.0, 1e6));
    let noise = noise_kind(r);
    if r.has("dissipator_sites") {
        let sites = r.usize_list_or("dissipator_sites", &[], (0, usize::MAX));
        if sites.iter().any(|&s| s == n + 1) {
            r.error(format!("dissipator_sites includes the probe (site {}); only chain sites 1..={n} may collapse", n + 1));
        } else if sites != (1..=n).collect::<Vec<_>>() {
            r.error(format!("dissipator_sites must list every chain site 1..={n}"));
        }
    }
    let chain = r.check(IsingChainSpec::new(n, h, 1.0)).unwrap_or(IsingChainSpec { n_sites: n, h: 1.0, j: 1.0 });
    let probe = r.check(ProbeCouplingSpec::new(h_p, j_p)).unwrap_or(ProbeCouplingSpec { h_p: 0.5, j_p: 0.5 });
    Experiment::IsingChain { chain, probe, noise, beta }
}

fn noise_kind(r: &mut Reader) -> NoiseKind {
    match r.f64_opt("rc_over_a", POSITIVE) {
        Some(rc) => NoiseKind::Correlated { rc_over_a: rc },
        None => NoiseKind::Local,
    }
}

fn time_choice(r: &mut Reader) -> TimeChoice {
    let per_point = r.bool_or("per_point", false);
    match r.f64_opt("t", (0.0, 1e9)) {
        Some(t) => {
            if per_point {
                r.error("`t` and `per_point = true` are mutually exclusive");
            }
            TimeChoice::Fixed(t)
        }
        None if per_point => TimeChoice::PerPoint,
        None => TimeChoice::OptimalAtLambdaMin,
    }
}

fn backend(r: &mut Reader) -> Backend {
    match r.string_or("backend", "auto", &["auto", "dense", "ode"]).as_str() {
        "dense" => Backend::Dense,
        "ode" => Backend::Ode,
        _ => Backend::Auto,
    }
}

fn grid_values(r: &mut Reader, default: GridSpec, range: (f64, f64)) -> Vec<f64> {
    let spec = r.grid_or(default, range);
    spec.values().unwrap_or_default()
}

pub fn execute(cmd: Command, r: &mut Reader, table1: bool) -> Result<Output, CliError> {
    match cmd {
        Command::SingleQubitDynamics => single_qubit_dynamics(r),
        Command::SseCheck => sse_check(r),
        Command::TwoQubitQfi => two_qubit_qfi(r),
        Command::Optimize if table1 => optimize_table1(r),
        Command::Optimize => optimize(r),
        Command::IsingScan => ising_scan(r),
        Command::HScan => h_scan_cmd(r),
        Command::SizeScan => size_scan_cmd(r),
        Command::DeltaG => delta_g(r),
        Command::Gap => gap(r),
    }
}

fn single_qubit_dynamics(r: &mut Reader) -> Result<Output, CliError> {
    let lambda = r.f64_req("lambda", RATE);
    let probe = probe_state(r, 0.0, 0.0);
    let t_max = r.f64_or("t_max", 50.0, POSITIVE);
    let samples = r.usize_or("samples", 501, (2, 1_000_000));
    let backend = backend(r);
    r.finish()?;

    let model = SingleQubitModel::new(1.0, lambda)?;
    let spec = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 0.0)?, 1)?;
    let liou = VectorizedLiouvillian::new(model.hamiltonian(), &spec, 1, lambda)?;
    let rho0 = bloch_pure_state(&probe);
    let mut table = Table::new(
        ["t[1/omega0]", "tau_x", "tau_y", "tau_z", "tau_x_analytic", "tau_y_analytic", "tau_z_analytic"]
            .map(String::from)
            .to_vec(),
    );
    let mut worst: f64 = 0.0;
    let mut analytic_available = true;
    for k in 0..samples {
        let t = t_max * k as f64 / (samples - 1) as f64;
        let num = propagate_with(&liou, &rho0, t, backend)?.bloch_vector()?;
        let exact = match analytic_single_qubit(1.0, lambda, &rho0, t) {
            Ok(s) => Some(s.bloch_vector()?),
            Err(Error::Unsupported(_)) => {
                analytic_available = false;
                None
            }
            Err(e) => return Err(e.into()),
        };
        let mut row = vec![Cell::Num(t)];
        row.extend(num.map(Cell::Num));
        match exact {
            Some(e) => {
                for c in 0..3 {
                    worst = worst.max((num[c] - e[c]).abs());
                }
                row.extend(e.map(Cell::Num));
            }
            None => row.extend([Cell::Na; 3]),
        }
        table.push(row);
    }
    Ok(Output {
        stem: "single-qubit-dynamics".into(),
        table,
        units: qubit_units(),
        t_opt: Value::Null,
        results: json!({
            "max_bloch_deviation": if analytic_available { json!(worst) } else { Value::Null },
            "envelope_rate": lambda,
        }),
    })
}

fn sse_check(r: &mut Reader) -> Result<Output, CliError> {
    let lambda = r.f64_or("lambda", 0.1, RATE);
    let probe = probe_state(r, 1.0, 0.5);
    let dt = r.f64_or("dt", 1e-3, (f64::MIN_POSITIVE, 1e-2));
    let n_traj = r.usize_or("n_traj", 2000, (1, 10_000_000));
    let seed = r.u64_or("seed", 7);
    let t_max = r.f64_or("t_max", 5.0, POSITIVE);
    let samples = r.usize_or("samples", 10, (1, 100_000));
    r.finish()?;

    let model = SingleQubitModel::new(1.0, lambda)?;
    let times: Vec<f64> = (1..=samples).map(|k| t_max * k as f64 / samples as f64).collect();
    let res = sse_simulate(&model, probe.amplitudes(), &times, &SseConfig { dt, n_traj, seed })?;
    let rho0 = bloch_pure_state(&probe);
    let spec = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 0.0)?, 1)?;
    let liou = VectorizedLiouvillian::new(model.hamiltonian(), &spec, 1, lambda)?;

    let mut header = vec!["t[1/omega0]".to_string()];
    for c in ["x", "y", "z"] {
        header.extend([format!("tau_{c}_mean"), format!("tau_{c}_stderr"), format!("tau_{c}_master")]);
    }
    let mut table = Table::new(header);
    let mut worst: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let master = propagate_with(&liou, &rho0, t, Backend::Dense)?.bloch_vector()?;
        let mut row = vec![Cell::Num(t)];
        for c in 0..3 {
            let (m, se) = (res.mean_bloch[k][c], res.std_err[k][c]);
            if se > 0.0 {
                worst = worst.max((m - master[c]).abs() / se);
            }
            row.extend([Cell::Num(m), Cell::Num(se), Cell::Num(master[c])]);
        }
        table.push(row);
    }
    Ok(Output {
        stem: "sse-check".into(),
        table,
        units: qubit_units(),
        t_opt: Value::Null,
        results: json!({"max_abs_z_score": worst, "n_traj": n_traj, "seed": seed}),
    })
}

fn two_qubit_qfi(r: &mut Reader) -> Result<Output, CliError> {
    let exp = two_qubit(r);
    let probe = probe_state(r, PI / 4.0, PI / 4.0);
    let grid = grid_values(r, GridSpec::linear(0.05, 0.5, 10), RATE);
    let g = match exp {
        Experiment::TwoQubit { g, .. } => g,
        _ => unreachable!(),
    };
    let t = match r.f64_opt("t", (0.0, 1e9)) {
        Some(t) => t,
        None if g != 0.0 => 2.0 * PI / g.abs(),
        None => {
            r.error("`t` is required when g = 0 (the default 2π/g is undefined)");
            0.0
        }
    };
    r.finish()?;

    let p = ProbePipeline::new(&exp, probe)?;
    let mut table = Table::new(["lambda[omega0]", "G[1/omega0^2]", "Q"].map(String::from).to_vec());
    for &l in &grid {
        let rec = p.qfi_at(l, t)?;
        table.push(vec![Cell::Num(l), Cell::Num(rec.g_value), Cell::Num(rec.q_value)]);
    }
    Ok(Output {
        stem: "two-qubit-qfi".into(),
        table,
        units: qubit_units(),
        t_opt: Value::Null,
        results: json!({"t_used": t, "t_default_convention": "2*pi/|g|"}),
    })
}

fn optimize(r: &mut Reader) -> Result<Output, CliError> {
    let exp = two_qubit(r);
    let lambda = r.f64_or("lambda", 0.1, RATE);
    let phi = r.f64_or("phi", PI / 4.0, (0.0, 2.0 * PI - f64::EPSILON));
    let t_min = r.f64_or("t_min", 0.1, (0.0, 1e9));
    let t_max = r.f64_or("t_max", 100.0, POSITIVE);
    if t_min >= t_max {
        r.error(format!("t_min {t_min} must be below t_max {t_max}"));
    }
    r.finish()?;

    let p = ProbePipeline::new(&exp, BlochState::new(0.0, phi)?)?;
    let res = optimize_t_theta(&p, lambda, (t_min, t_max), phi)?;
    let mut table = Table::new(
        [
            "lambda[omega0]",
            "t_opt[1/omega0]",
            "theta_opt",
            "G_max[1/omega0^2]",
            "G_grid_max[1/omega0^2]",
            "n_iterations",
            "converged",
            "degenerate",
        ]
        .map(String::from)
        .to_vec(),
    );
    table.push(vec![
        Cell::Num(lambda),
        Cell::Num(res.t_opt),
        Cell::Num(res.theta_opt),
        Cell::Num(res.g_max),
        Cell::Num(res.grid_max),
        Cell::Int(res.n_iterations as u64),
        Cell::Int(res.converged as u64),
        Cell::Int(res.degenerate as u64),
    ]);
    Ok(Output {
        stem: "optimize".into(),
        table,
        units: qubit_units(),
        t_opt: json!(res.t_opt),
        results: serde_json::to_value(res).unwrap_or(Value::Null),
    })
}

fn optimize_table1(r: &mut Reader) -> Result<Output, CliError> {
    let sizes = r.usize_list_or("sizes", &[2, 3, 4], (2, 5));
    let base = chain(r, None);
    let probe = probe_state(r, PI, 0.0);
    r.finish()?;

    let mut table = Table::new(
        [
            "lambda[J]",
            "N",
            "t_opt[1/J]",
            "t_opt_reference[1/J]",
            "G_at_t_opt[1/J^2]",
            "G_at_reference[1/J^2]",
            "ratio",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut found = Map::new();
    for (lambda, _) in REFERENCE_T_OPT {
        for &n in &sizes {
            let chain = match base {
                Experiment::IsingChain { chain, .. } => IsingChainSpec::new(n, chain.h, chain.j)?,
                _ => unreachable!(),
            };
            let p = ProbePipeline::new(&base.with_chain(chain), probe)?;
            let w = t_window(p.experiment(), lambda);
            let opt = p.find_t_opt(lambda, w, t_step(w))?;
            let t_ref = reference_t_opt(lambda, n).expect("tabulated cell");
            let g_ref = p.qfi_at(lambda, t_ref)?.g_value;
            let ratio = if opt.g_max > 0.0 { Some(g_ref / opt.g_max) } else { None };
            table.push(vec![
                Cell::Num(lambda),
                Cell::Int(n as u64),
                Cell::Num(opt.t_opt),
                Cell::Num(t_ref),
                Cell::Num(opt.g_max),
                Cell::Num(g_ref),
                ratio.into(),
            ]);
            found.insert(format!("lambda={lambda:e},N={n}"), json!(opt.t_opt));
        }
    }
    Ok(Output {
        stem: "optimize-table1".into(),
        table,
        units: chain_units(),
        t_opt: Value::Object(found),
        results: Value::Null,
    })
}

fn t_used_json(res: &ScanResult) -> Value {
    let mut m = Map::new();
    for s in &res.series {
        m.insert(s.label.clone(), s.t_used.map_or(json!("per-point"), |t| json!(t)));
    }
    Value::Object(m)
}

fn ising_scan(r: &mut Reader) -> Result<Output, CliError> {
    let hs = r.f64_list_or("h", &[1.0], POSITIVE);
    let mut exp = chain_at(r, Some(4), hs.first().copied().unwrap_or(1.0));
    let probe = probe_state(r, PI, 0.0);
    let grid = grid_values(r, GridSpec::log(1e-5, 1e-3, 20), RATE);
    let time = time_choice(r);
    r.finish()?;

    let mut header = vec!["lambda[J]".to_string()];
    header.extend(hs.iter().map(|h| format!("G(h={h}J)[1/J^2]")));
    header.extend(hs.iter().map(|h| format!("Q(h={h}J)")));
    let mut results = Vec::with_capacity(hs.len());
    let mut t_opt = Map::new();
    for &h in &hs {
        if let Experiment::IsingChain { chain, .. } = exp {
            exp = exp.with_chain(IsingChainSpec::new(chain.n_sites, h, chain.j)?);
        }
        let res = lambda_scan(&exp, probe, &grid, time)?;
        t_opt.insert(format!("h={h}"), res.series[0].t_used.map_or(json!("per-point"), |t| json!(t)));
        results.push(res);
    }
    let mut table = Table::new(header);
    for (i, &l) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(l)];
        row.extend(results.iter().map(|res| Cell::Num(res.series[0].records[i].g_value)));
        row.extend(results.iter().map(|res| Cell::Num(res.series[0].records[i].q_value)));
        table.push(row);
    }
    Ok(Output { stem: "ising-scan".into(), table, units: chain_units(), t_opt: Value::Object(t_opt), results: Value::Null })
}

fn h_scan_cmd(r: &mut Reader) -> Result<Output, CliError> {
    let lambda = r.f64_req("lambda", RATE);
    let exp = chain(r, Some(4));
    let probe = probe_state(r, PI, 0.0);
    let grid = grid_values(r, GridSpec::linear(0.9, 1.1, 21), POSITIVE);
    let time = time_choice(r);
    r.finish()?;

    let res = h_scan(&exp, probe, lambda, &grid, time)?;
    let mut table = Table::new(["h[J]", "G[1/J^2]", "Q"].map(String::from).to_vec());
    for (h, rec) in grid.iter().zip(&res.series[0].records) {
        table.push(vec![Cell::Num(*h), Cell::Num(rec.g_value), Cell::Num(rec.q_value)]);
    }
    Ok(Output { stem: "h-scan".into(), table, units: chain_units(), t_opt: t_used_json(&res), results: Value::Null })
}

fn size_scan_cmd(r: &mut Reader) -> Result<Output, CliError> {
    let sizes = r.usize_list_or("sizes", &[2, 3, 4, 5], (1, MAX_SITES));
    let exp = chain(r, None);
    let probe = probe_state(r, PI, 0.0);
    let grid = grid_values(r, GridSpec::log(0.1, 0.5, 20), RATE);
    let time = time_choice(r);
    r.finish()?;

    let res = size_scan(&exp, probe, &sizes, &grid, time)?;
    let mut header = vec!["lambda[J]".to_string()];
    header.extend(sizes.iter().map(|n| format!("G(N={n})[1/J^2]")));
    header.extend(sizes.iter().map(|n| format!("Q(N={n})")));
    let mut table = Table::new(header);
    for (i, &l) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(l)];
        row.extend(res.series.iter().map(|s| Cell::Num(s.records[i].g_value)));
        row.extend(res.series.iter().map(|s| Cell::Num(s.records[i].q_value)));
        table.push(row);
    }
    Ok(Output { stem: "size-scan".into(), table, units: chain_units(), t_opt: t_used_json(&res), results: Value::Null })
}

fn delta_g(r: &mut Reader) -> Result<Output, CliError> {
    let rc = r.f64_or("rc_over_a", 2.0, POSITIVE);
    let exp = chain(r, Some(4));
    let probe = probe_state(r, PI, 0.0);
    let grid = grid_values(r, GridSpec::log(1e-5, 1e-3, 10), RATE);
    let time = time_choice(r);
    r.finish()?;

    let exp = exp.with_noise(NoiseKind::Correlated { rc_over_a: rc });
    let res = delta_g_scan(&exp, probe, &grid, time)?;
    let dg = res.delta_g.clone().unwrap_or_default();
    let mut table = Table::new(["lambda[J]", "G_corr[1/J^2]", "G_uncorr[1/J^2]", "delta_G"].map(String::from).to_vec());
    for (i, &l) in grid.iter().enumerate() {
        table.push(vec![
            Cell::Num(l),
            Cell::Num(res.series[0].records[i].g_value),
            Cell::Num(res.series[1].records[i].g_value),
            dg[i].into(),
        ]);
    }
    let t = res.series[0].t_used.map_or(json!("per-point"), |t| json!(t));
    Ok(Output { stem: "delta-g".into(), table, units: chain_units(), t_opt: json!({"local model": t}), results: Value::Null })
}

fn gap(r: &mut Reader) -> Result<Output, CliError> {
    let model = r.string_or("model", "single-qubit", &["single-qubit", "two-qubit", "ising"]);
    let lambdas = r.f64_list_or("lambda", &[0.1], RATE);
    let (liou, units) = match model.as_str() {
        "single-qubit" => {
            r.finish()?;
            let m = SingleQubitModel::new(1.0, 0.0)?;
            let spec = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 0.0)?, 1)?;
            (VectorizedLiouvillian::new(m.hamiltonian(), &spec, 1, 0.0)?, qubit_units())
        }
        "two-qubit" => {
            let exp = two_qubit(r);
            r.finish()?;
            (exp.liouvillian(0.0)?, qubit_units())
        }
        _ => {
            let exp = chain(r, Some(2));
            r.finish()?;
            (exp.liouvillian(0.0)?, chain_units())
        }
    };
    let lambda_unit = units["lambda"].as_str().unwrap_or("J").to_string();
    let mut table = Table::new(vec![
        format!("lambda[{lambda_unit}]"),
        format!("gap[{lambda_unit}]"),
        "null_modes".into(),
        "modes".into(),
    ]);
    for &l in &lambdas {
        let sp = spectrum(&liou.with_lambda(l)?)?;
        table.push(vec![Cell::Num(l), Cell::Num(sp.gap), Cell::Int(sp.null_modes().len() as u64), Cell::Int(sp.modes.len() as u64)]);
    }
    Ok(Output { stem: "gap".into(), table, units, t_opt: Value::Null, results: Value::Null })
}
