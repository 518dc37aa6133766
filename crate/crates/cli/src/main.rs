//! Command-line front end. `run` and `sweep` execute JSON-configured
//! experiment grids, `verify` runs one named verification suite, and
//! `sample` exports raw noise draws for external inspection.
//!
//! Exit codes: 0 on success, 1 on runtime failure or a failed suite,
//! 2 on invalid usage (bad config, unknown suite, malformed flags).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gnfw::harness::{
    resolve_output_dir, run_experiment, run_suite, run_sweep, write_gg_samples, CellSummary,
    ExperimentConfig, HarnessError, RunOptions, TrendReport, VerificationReport, OUT_DIR_ENV,
    SUITES,
};

#[derive(Parser)]
#[command(name = "gnfw", version, about = "Private Frank-Wolfe experiment harness")]
struct Cli {
    /// Output directory; overrides both GNFW_OUT_DIR and the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for grid cells; 0 uses the process-wide default.
    #[arg(long, global = true, default_value_t = 0, value_name = "K")]
    workers: usize,

    /// Accept configs with `disable_noise` set. Runs made this way carry
    /// no privacy guarantee; the flag exists for convergence testing.
    #[arg(long = "unsafe-disable-noise", global = true)]
    unsafe_disable_noise: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the (n, eps, trial) grid described by a JSON config.
    Run { config: PathBuf },
    /// Execute the grid, then fit a log-log excess-risk trend per eps.
    Sweep { config: PathBuf },
    /// Run one verification suite with fixed seeds.
    #[command(after_help = suites_help())]
    Verify { suite: String },
    /// Write `count` generalized Gaussian draws as CSV rows.
    Sample { d: usize, r: f64, sigma2: f64, count: usize, seed: u64 },
}

fn suites_help() -> String {
    format!("Suites: {}", SUITES.join(", "))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Caller mistakes exit 2, runtime failures exit 1.
fn exit_code_for(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) | HarnessError::Json(_) | HarnessError::UnknownSuite(_) => 2,
        _ => 1,
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, HarnessError> {
    let opts = RunOptions { workers: cli.workers, allow_disable_noise: cli.unsafe_disable_noise };
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(config)?;
            let dir = resolve_output_dir(cli.out.as_deref(), &cfg);
            let arts = run_experiment(&cfg, &dir, &opts)?;
            for s in &arts.output.summaries {
                println!("{}", summary_line(s));
            }
            println!("wrote {}", arts.runs_csv.display());
            println!("wrote {}", arts.summary_csv.display());
            println!("wrote {}", arts.manifest.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config } => {
            let cfg = load_config(config)?;
            let dir = resolve_output_dir(cli.out.as_deref(), &cfg);
            let (arts, trends, trend_path) = run_sweep(&cfg, &dir, &opts)?;
            for s in &arts.output.summaries {
                println!("{}", summary_line(s));
            }
            for t in &trends {
                println!("{}", trend_line(t));
            }
            println!("wrote {}", trend_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let report = run_suite(suite)?;
            let dir = fallback_output_dir(cli.out.as_deref());
            let path = write_report(&dir, &report)?;
            for c in &report.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!(
                    "[{tag}] {}: measured {:.6e} vs bound {:.6e} (margin {:.3e})",
                    c.description, c.measured, c.bound, c.margin
                );
            }
            let passed = report.checks.iter().filter(|c| c.pass).count();
            println!("suite {}: {passed}/{} checks passed", report.suite, report.checks.len());
            println!("wrote {}", path.display());
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Sample { d, r, sigma2, count, seed } => {
            let dir = fallback_output_dir(cli.out.as_deref());
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("samples.csv");
            let mut out = BufWriter::new(File::create(&path)?);
            // Bad distribution parameters are a usage error, same as a
            // bad config file.
            write_gg_samples(*d, *r, *sigma2, *count, *seed, &mut out).map_err(|e| match e {
                HarnessError::Mechanism(m) => {
                    HarnessError::Config(format!("invalid sample parameters: {m}"))
                }
                other => other,
            })?;
            out.flush()?;
            println!("wrote {count} draws to {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// An unreadable config path is a caller mistake, not a runtime failure;
/// later Io errors (e.g. unwritable output) keep exit code 1.
fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    ExperimentConfig::from_path(path).map_err(|e| match e {
        HarnessError::Io(io) => {
            HarnessError::Config(format!("cannot read {}: {io}", path.display()))
        }
        other => other,
    })
}

/// Output directory for subcommands without a config file: the flag,
/// then the environment override, then ./out.
fn fallback_output_dir(cli: Option<&Path>) -> PathBuf {
    if let Some(dir) = cli {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    PathBuf::from("out")
}

fn write_report(dir: &Path, report: &VerificationReport) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("verify_{}.json", report.suite));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

fn summary_line(s: &CellSummary) -> String {
    format!(
        "cell solver={} n={} eps={} trials={}: median excess {:.6e} [q10 {:.6e}, q90 {:.6e}]",
        s.solver, s.n, s.eps, s.trials, s.excess_median, s.excess_q10, s.excess_q90
    )
}

fn trend_line(t: &TrendReport) -> String {
    format!(
        "trend eps={}: slope {:+.4} (bootstrap 95% [{:+.4}, {:+.4}]), {} points{}",
        t.eps,
        t.slope,
        t.slope_ci.0,
        t.slope_ci.1,
        t.points.len(),
        if t.flat { ", flat" } else { "" }
    )
}
