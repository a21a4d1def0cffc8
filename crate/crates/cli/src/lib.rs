//! Command-line experiment runner for `vdlab-core`.
//!
//! `vdlab run --config <path>` executes one experiment (or `all` of them),
//! writes `report.json` plus one CSV per table, and prints one line per check.
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on any
//! configuration or runtime error.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use config::{Experiment, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{Check, Report, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vdlab", version, about = "Verification experiments for the conformal Klein-Gordon and Dirac operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Experiment name, or `all` to run every experiment into per-experiment directories.
        #[arg(long)]
        experiment: Option<String>,
        /// Output directory; `VDLAB_OUT` takes precedence.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `section.key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        refine_levels: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

/// Runs the configured experiment in memory.
pub fn execute(config: &RunConfig) -> CliResult<Report> {
    experiments::run_experiment(config)
}

/// Entry point shared by the binary and the tests; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            // Display already carries the source chain.
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::Validate { config, set } => {
            let c = RunConfig::load(&config, &set)?;
            println!("{}: valid {} config", config.display(), c.experiment());
            Ok(EXIT_OK)
        }
        Command::Run {
            config,
            experiment,
            out,
            mut set,
            refine_levels,
            seed,
        } => {
            let all = experiment.as_deref() == Some("all");
            if let Some(name) = experiment.as_deref().filter(|_| !all) {
                if Experiment::parse(name).is_none() {
                    let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                    return Err(CliError::config(
                        "--experiment",
                        format!("unknown experiment `{name}`; expected one of {} or all", names.join(", ")),
                    ));
                }
                set.push(format!("run.experiment=\"{name}\""));
            }
            if let Some(n) = refine_levels {
                set.push(format!("numerics.refine_levels={n}"));
            }
            if let Some(s) = seed {
                set.push(format!("run.seed={s}"));
            }
            let base = RunConfig::load(&config, &set)?;
            let dir = output_dir(out, &base);
            if all {
                run_all(&config, &set, &dir)
            } else {
                let report = execute(&base)?;
                report.write(&dir)?;
                Ok(print_summary(&report, &dir, None))
            }
        }
    }
}

/// `VDLAB_OUT`, then `--out`, then `output.dir`.
fn output_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    std::env::var_os("VDLAB_OUT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or(flag)
        .unwrap_or_else(|| PathBuf::from(&config.output.dir))
}

fn print_summary(report: &Report, dir: &Path, prefix: Option<&str>) -> i32 {
    let tag = prefix.map(|p| format!("[{p}] ")).unwrap_or_default();
    for c in &report.checks {
        println!("{tag}{}", c.summary_line());
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!(
        "{tag}{}: {passed}/{} checks passed, report in {}",
        report.manifest.experiment,
        report.checks.len(),
        dir.display()
    );
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Every experiment as an independent job in `<dir>/<name>/`; the summary is
/// ordered by experiment name regardless of completion order.
fn run_all(config: &Path, overrides: &[String], dir: &Path) -> CliResult<i32> {
    let mut names: Vec<Experiment> = Experiment::ALL.to_vec();
    names.sort_by_key(|e| e.name());
    let results: Vec<CliResult<Report>> = names
        .par_iter()
        .map(|&e| {
            let mut set = overrides.to_vec();
            set.push(format!("run.experiment=\"{}\"", e.name()));
            let c = RunConfig::load(config, &set)?;
            let report = execute(&c)?;
            report.write(&dir.join(e.name()))?;
            Ok(report)
        })
        .collect();

    let mut code = EXIT_OK;
    let mut merged = Vec::new();
    for (e, r) in names.iter().zip(results) {
        let report = r?;
        let sub = dir.join(e.name());
        if print_summary(&report, &sub, Some(e.name())) != EXIT_OK {
            code = EXIT_CHECK_FAILED;
        }
        merged.push(serde_json::json!({
            "experiment": e.name(),
            "passed": report.passed(),
            "checks": report.checks,
        }));
    }
    let mut text = serde_json::to_string_pretty(&serde_json::json!({ "experiments": merged }))?;
    text.push('\n');
    std::fs::write(dir.join("summary.json"), text)?;
    Ok(code)
}
