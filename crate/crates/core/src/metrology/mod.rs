//! Quantum Fisher information of the probe, time/angle optimization and
//! parameter scans.

mod experiment;
mod optimize;
mod pipeline;
mod qfi;
mod scan;

pub use experiment::Experiment;
pub use optimize::{
    grid_maximum, nelder_mead, optimize_t_theta, NelderMeadRun, OptimizationResult, DEGENERATE_TOL, GRID_T, GRID_THETA,
    MAX_ITERATIONS, SIMPLEX_TOL,
};
pub use pipeline::{
    probe_qfi_at, DerivativeSource, FiniteDifferenceCheck, ProbePipeline, QfiMethod, QfiRecord, TimeOptimum,
};
pub use qfi::{cramer_rao_bound, qfi_general, qfi_qubit, sld, CramerRao, EIGEN_CUTOFF};
pub use scan::{
    delta_g_scan, h_scan, lambda_scan, linear_grid, log_grid, optimal_time, preset_grid, reference_t_opt, size_scan,
    t_step, t_window, ScanKind, ScanResult, ScanSeries, TimeChoice, DELTA_G_FLOOR, LAMBDA_PRESETS, PRESET_POINTS,
    REFERENCE_T_OPT,
};
