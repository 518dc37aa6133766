//! Grid execution and result persistence: one row per (n, eps, trial)
//! cell, summaries per cell, and a manifest tying outputs to the config
//! hash and seed root.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, SolverKind};
use super::HarnessError;
use crate::mechanisms::PrivacyBudget;
use crate::problems::Problem;
use crate::solvers::{noisy_tree_sfw, poly_sfw, PolySfwConfig, RunReport, TreeSfwConfig};
use crate::util::{derive_seed, fmt_f64};

/// Seed-derivation tag separating the dataset stream from solver noise.
const DATA_STREAM: u64 = 0xDA7A;

pub const RUNS_HEADER: &str = "run_id,solver,n,eps,delta,p_or_K,trial,seed,excess_risk,\
samples_consumed,wall_time_ns,max_bias_gap,max_nu_t";
pub const SUMMARY_HEADER: &str =
    "solver,n,eps,delta,p_or_K,trials,excess_median,excess_q10,excess_q90";

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the process-wide default pool.
    pub workers: usize,
    /// Accept configs with `disable_noise` set. The CLI only sets this
    /// behind its unsafe flag.
    pub allow_disable_noise: bool,
}

/// One executed cell, flattened for the results schema.
#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub run_id: usize,
    pub solver: SolverKind,
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub p_or_k: f64,
    pub trial: usize,
    pub seed: u64,
    pub excess_risk: f64,
    pub samples_consumed: usize,
    pub wall_time_ns: u64,
    pub max_bias_gap: f64,
    pub max_nu_t: f64,
}

/// Per-(n, eps) aggregate of the trial excess risks.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub solver: SolverKind,
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub p_or_k: f64,
    pub trials: usize,
    pub excess_median: f64,
    pub excess_q10: f64,
    pub excess_q90: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<RunRow>,
    pub summaries: Vec<CellSummary>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub output: ExperimentOutput,
    pub runs_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    index: usize,
    n: usize,
    eps: f64,
    trial: usize,
    seed: u64,
}

/// Quantile with linear interpolation between order statistics; `sorted`
/// must be ascending and nonempty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
}

fn run_cell(
    cfg: &ExperimentConfig,
    problem: &Problem,
    job: &Job,
) -> Result<RunRow, HarnessError> {
    let cell_err = |source| HarnessError::Cell { n: job.n, eps: job.eps, trial: job.trial, source };
    let budget = PrivacyBudget::new(job.eps, cfg.delta)?;
    let mut data_rng = ChaCha12Rng::seed_from_u64(derive_seed(job.seed, &[DATA_STREAM]));
    let dataset = problem.generate_dataset(job.n, &mut data_rng);
    let mut rng = ChaCha12Rng::seed_from_u64(job.seed);

    let report: RunReport = match cfg.solver {
        SolverKind::TreeSfw => {
            let mut solver_cfg =
                TreeSfwConfig::for_problem(problem, job.n, budget, job.seed).map_err(cell_err)?;
            solver_cfg.disable_noise = cfg.disable_noise;
            noisy_tree_sfw(&dataset, problem, &solver_cfg, &mut rng).map_err(cell_err)?
        }
        SolverKind::PolySfw => {
            let mut solver_cfg =
                PolySfwConfig::for_problem(problem, job.n, budget, job.seed).map_err(cell_err)?;
            solver_cfg.disable_noise = cfg.disable_noise;
            poly_sfw(&dataset, problem, &solver_cfg, &mut rng).map_err(cell_err)?
        }
    };
    // Single-pass contract: a run can never touch more than its n rows.
    assert!(
        report.samples_consumed <= job.n,
        "solver consumed {} of {} samples",
        report.samples_consumed,
        job.n
    );
    let max_nu = report
        .noise_suboptimality_trace
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RunRow {
        run_id: job.index,
        solver: cfg.solver,
        n: job.n,
        eps: job.eps,
        delta: cfg.delta,
        p_or_k: cfg.p_or_k(),
        trial: job.trial,
        seed: job.seed,
        excess_risk: report.excess_risk.unwrap_or(f64::NAN),
        samples_consumed: report.samples_consumed,
        wall_time_ns: report.wall_time_ns,
        max_bias_gap: report.bias_trace.max_gap().unwrap_or(f64::NAN),
        max_nu_t: if report.noise_suboptimality_trace.is_empty() { f64::NAN } else { max_nu },
    })
}

/// Execute every (n, eps, trial) cell and aggregate per-cell summaries.
/// Rows come back in grid order regardless of scheduling: seeds depend
/// only on grid coordinates, and the parallel map preserves indices.
pub fn execute(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    if cfg.disable_noise && !opts.allow_disable_noise {
        return Err(HarnessError::Config(
            "config disables noise; rerun with the explicit unsafe override to accept it".into(),
        ));
    }
    let problem = cfg.build_problem()?;
    let mut jobs = Vec::with_capacity(cfg.n_grid.len() * cfg.eps_grid.len() * cfg.trials);
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        for (ei, &eps) in cfg.eps_grid.iter().enumerate() {
            for trial in 0..cfg.trials {
                jobs.push(Job {
                    index: jobs.len(),
                    n,
                    eps,
                    trial,
                    seed: derive_seed(cfg.seed_root, &[ni as u64, ei as u64, trial as u64]),
                });
            }
        }
    }

    let run_all = || -> Result<Vec<RunRow>, HarnessError> {
        jobs.par_iter().map(|job| run_cell(cfg, &problem, job)).collect()
    };
    let rows = if opts.workers == 0 {
        run_all()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
        pool.install(run_all)?
    };

    let mut summaries = Vec::with_capacity(cfg.n_grid.len() * cfg.eps_grid.len());
    for cell in rows.chunks(cfg.trials) {
        let mut excess: Vec<f64> = cell.iter().map(|r| r.excess_risk).collect();
        excess.sort_by(f64::total_cmp);
        summaries.push(CellSummary {
            solver: cfg.solver,
            n: cell[0].n,
            eps: cell[0].eps,
            delta: cfg.delta,
            p_or_k: cell[0].p_or_k,
            trials: cfg.trials,
            excess_median: quantile(&excess, 0.5),
            excess_q10: quantile(&excess, 0.1),
            excess_q90: quantile(&excess, 0.9),
        });
    }
    Ok(ExperimentOutput { rows, summaries })
}

pub fn write_runs_csv(rows: &[RunRow]) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.run_id,
            r.solver,
            r.n,
            fmt_f64(r.eps),
            fmt_f64(r.delta),
            fmt_f64(r.p_or_k),
            r.trial,
            r.seed,
            fmt_f64(r.excess_risk),
            r.samples_consumed,
            r.wall_time_ns,
            fmt_f64(r.max_bias_gap),
            fmt_f64(r.max_nu_t),
        ));
    }
    out
}

pub fn write_summary_csv(summaries: &[CellSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.solver,
            s.n,
            fmt_f64(s.eps),
            fmt_f64(s.delta),
            fmt_f64(s.p_or_k),
            s.trials,
            fmt_f64(s.excess_median),
            fmt_f64(s.excess_q10),
            fmt_f64(s.excess_q90),
        ));
    }
    out
}

/// Blank out the wall-clock column so reruns of the same seed compare
/// byte-identical; timings are the one column that legitimately varies.
pub fn mask_wall_time(csv: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let Some(col) = header.split(',').position(|name| name == "wall_time_ns") else {
        return csv.to_string();
    };
    let mut out = String::from(header);
    out.push('\n');
    for line in lines {
        let mut fields: Vec<&str> = line.split(',').collect();
        if col < fields.len() {
            fields[col] = "-";
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: String,
    seed_root: u64,
    version: &'a str,
    files: Vec<String>,
}

/// Write `manifest.json` next to the result files: the config hash, seed
/// root, and code version pin everything needed for an exact rerun.
pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    files: &[&str],
) -> Result<PathBuf, HarnessError> {
    let canonical = serde_json::to_string(cfg)?;
    let digest = Sha256::digest(canonical.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let manifest = Manifest {
        command,
        config_sha256: hex,
        seed_root: cfg.seed_root,
        version: env!("CARGO_PKG_VERSION"),
        files: files.iter().map(|f| f.to_string()).collect(),
    };
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Execute the grid and persist `runs.csv`, `summary.csv`, and
/// `manifest.json` under `out_dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<RunArtifacts, HarnessError> {
    let output = execute(cfg, opts)?;
    std::fs::create_dir_all(out_dir)?;
    let runs_csv = out_dir.join("runs.csv");
    std::fs::write(&runs_csv, write_runs_csv(&output.rows))?;
    let summary_csv = out_dir.join("summary.csv");
    std::fs::write(&summary_csv, write_summary_csv(&output.summaries))?;
    let manifest = write_manifest(out_dir, "run", cfg, &["runs.csv", "summary.csv"])?;
    Ok(RunArtifacts { output, runs_csv, summary_csv, manifest })
}
