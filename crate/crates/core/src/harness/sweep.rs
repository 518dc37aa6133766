//! Trend extraction: log-log slope of median excess risk against n with
//! a bootstrap confidence interval, one fit per epsilon level.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::runner::{self, quantile, ExperimentOutput, RunArtifacts, RunOptions};
use super::HarnessError;
use crate::util::derive_seed;

/// |slope| at or below this is reported as flat; a solver whose risk does
/// not drop with n gets flagged rather than silently fitted.
pub const FLAT_SLOPE_TOL: f64 = 0.05;

/// Bootstrap resamples behind the slope confidence interval.
const BOOTSTRAP_DEFAULT: usize = 200;

/// Seed-derivation tag for bootstrap resampling.
const BOOT_STREAM: u64 = 0xB007;

#[derive(Debug, Clone, Serialize)]
pub struct TrendPoint {
    pub n: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub eps: f64,
    pub points: Vec<TrendPoint>,
    /// OLS slope of ln(median excess risk) against ln(n).
    pub slope: f64,
    pub intercept: f64,
    /// Percentile bootstrap interval for the slope (2.5%, 97.5%).
    pub slope_ci: (f64, f64),
    pub bootstrap: usize,
    pub flat: bool,
}

/// Least squares line through (ln x, ln y); every coordinate must be
/// strictly positive.
pub fn ols_loglog(points: &[(f64, f64)]) -> Result<(f64, f64), HarnessError> {
    if points.len() < 2 {
        return Err(HarnessError::Config("slope fit needs at least 2 points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(HarnessError::Config(
            "slope fit needs strictly positive risks and sizes".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Config("slope fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    quantile(&values, 0.5)
}

/// Fit the trend for one epsilon level. `cells` pairs each n with all of
/// its per-trial excess risks; the grid must have at least 4 sizes
/// spanning a factor of 32.
pub fn fit_trend(
    cells: &[(f64, Vec<f64>)],
    eps: f64,
    bootstrap: usize,
    seed: u64,
) -> Result<TrendReport, HarnessError> {
    if cells.len() < 4 {
        return Err(HarnessError::Config(format!(
            "trend fit needs an n-grid with >= 4 points, got {}",
            cells.len()
        )));
    }
    let n_min = cells.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let n_max = cells.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    if !(n_max / n_min >= 32.0) {
        return Err(HarnessError::Config(format!(
            "trend fit needs the n-grid to span a factor of 32, got {n_min}..{n_max}"
        )));
    }
    let points: Vec<TrendPoint> = cells
        .iter()
        .map(|(n, values)| TrendPoint { n: *n, median: median_of(values.clone()) })
        .collect();
    let fit_input: Vec<(f64, f64)> = points.iter().map(|p| (p.n, p.median)).collect();
    let (slope, intercept) = ols_loglog(&fit_input)?;

    let mut boot_slopes = Vec::with_capacity(bootstrap);
    for b in 0..bootstrap {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, &[BOOT_STREAM, b as u64]));
        let resampled: Vec<(f64, f64)> = cells
            .iter()
            .map(|(n, values)| {
                let draws: Vec<f64> =
                    (0..values.len()).map(|_| values[rng.random_range(0..values.len())]).collect();
                (*n, median_of(draws))
            })
            .collect();
        // A resample with a zero median cannot be log-fitted; reuse the
        // point fit rather than aborting the interval.
        boot_slopes.push(ols_loglog(&resampled).map(|f| f.0).unwrap_or(slope));
    }
    boot_slopes.sort_by(f64::total_cmp);
    let slope_ci = if boot_slopes.is_empty() {
        (slope, slope)
    } else {
        (quantile(&boot_slopes, 0.025), quantile(&boot_slopes, 0.975))
    };
    Ok(TrendReport {
        eps,
        points,
        slope,
        intercept,
        slope_ci,
        bootstrap,
        flat: slope.abs() <= FLAT_SLOPE_TOL,
    })
}

/// Run the full grid, then fit one trend per epsilon level.
pub fn sweep_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(ExperimentOutput, Vec<TrendReport>), HarnessError> {
    let output = runner::execute(cfg, opts)?;
    let trends = trends_from_output(cfg, &output)?;
    Ok((output, trends))
}

pub(crate) fn trends_from_output(
    cfg: &ExperimentConfig,
    output: &ExperimentOutput,
) -> Result<Vec<TrendReport>, HarnessError> {
    let mut trends = Vec::with_capacity(cfg.eps_grid.len());
    for (ei, &eps) in cfg.eps_grid.iter().enumerate() {
        let cells: Vec<(f64, Vec<f64>)> = cfg
            .n_grid
            .iter()
            .map(|&n| {
                let values: Vec<f64> = output
                    .rows
                    .iter()
                    .filter(|r| r.n == n && r.eps == eps)
                    .map(|r| r.excess_risk)
                    .collect();
                (n as f64, values)
            })
            .collect();
        trends.push(fit_trend(
            &cells,
            eps,
            BOOTSTRAP_DEFAULT,
            derive_seed(cfg.seed_root, &[ei as u64]),
        )?);
    }
    Ok(trends)
}

/// Sweep and persist: the run artifacts plus `trend.json`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<(RunArtifacts, Vec<TrendReport>, PathBuf), HarnessError> {
    let (output, trends) = sweep_experiment(cfg, opts)?;
    std::fs::create_dir_all(out_dir)?;
    let runs_csv = out_dir.join("runs.csv");
    std::fs::write(&runs_csv, runner::write_runs_csv(&output.rows))?;
    let summary_csv = out_dir.join("summary.csv");
    std::fs::write(&summary_csv, runner::write_summary_csv(&output.summaries))?;
    let trend_path = out_dir.join("trend.json");
    let mut text = serde_json::to_string_pretty(&trends)?;
    text.push('\n');
    std::fs::write(&trend_path, text)?;
    let manifest =
        runner::write_manifest(out_dir, "sweep", cfg, &["runs.csv", "summary.csv", "trend.json"])?;
    Ok((
        RunArtifacts { output, runs_csv, summary_csv, manifest },
        trends,
        trend_path,
    ))
}
