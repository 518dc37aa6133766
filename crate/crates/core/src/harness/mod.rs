//! Experiment orchestration: JSON-configured runs over (n, eps, trial)
//! grids, trend extraction from sweeps, verification suites for the
//! quantitative claims, and sample export for external inspection.
//!
//! This is the only concurrent layer in the crate. Cells are independent
//! jobs whose seeds are derived from (seed root, grid coordinates), so
//! scheduling never affects results and parallel runs merge back in
//! deterministic order.

mod config;
mod runner;
mod sample;
mod sweep;
mod verify;

pub use config::{
    resolve_output_dir, ExperimentConfig, GeometrySpec, ProblemSpec, SolverKind, OUT_DIR_ENV,
};
pub use runner::{
    mask_wall_time, quantile, run_experiment, write_manifest, CellSummary, ExperimentOutput,
    RunArtifacts, RunOptions, RunRow,
};
pub use sample::write_gg_samples;
pub use sweep::{
    fit_trend, ols_loglog, run_sweep, sweep_experiment, TrendPoint, TrendReport, FLAT_SLOPE_TOL,
};
pub use verify::{
    accounting_suite, bias_suite, convexity_suite, geometry_checks, gg_moments_suite,
    martingale_suite, numeric_gg_renyi, renyi_suite, run_suite, sensitivity_suite, CheckRecord,
    VerificationReport, SUITES,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::mechanisms::MechanismError;
use crate::problems::ProblemError;
use crate::solvers::SolverError;

/// Errors from configuration, orchestration, and persistence. The CLI
/// maps `Config`, `Json`, and `UnknownSuite` to exit code 2 (caller
/// mistake) and everything else to exit code 1 (runtime failure).
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
    #[error("cell n={n} eps={eps} trial={trial}: {source}")]
    Cell {
        n: usize,
        eps: f64,
        trial: usize,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}
