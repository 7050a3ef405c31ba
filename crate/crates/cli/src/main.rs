//! `relfix`: runs the worked-example verification suites and boundary-value
//! solves, writing `report.json` plus CSV tables.
//!
//! Exit status: 0 when every asserted check passes, 1 when one fails,
//! 2 for usage and configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod examples;
mod fbvp;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use relfix_core::fixtures::ExampleId;

use crate::report::Report;

#[derive(Parser)]
#[command(name = "relfix", version, about = "Relation-constrained fixed-point checks and Caputo BVP solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check battery for a worked example (ex1.7, ex1.13, ex1.14, ex2.3, ex2.4).
    VerifyExample {
        id: ExampleId,
        /// Lattice step for the interval sample.
        #[arg(long)]
        step: Option<f64>,
        /// Seed for the extra orbits drawn from the sample.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve the boundary-value problem described by a TOML config.
    SolveFbvp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the summary of an earlier run and exit with its status.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn prepare(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
        .map_err(Failure::Usage)
}

fn finish(report: &Report, out: Option<&Path>) -> Result<bool, Failure> {
    if let Some(dir) = out {
        report.write(dir).map_err(Failure::Run)?;
    }
    print!("{}", report.summary());
    Ok(report.all_passed)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::VerifyExample { id, step, seed, out } => {
            if let Some(s) = step {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Failure::Usage(anyhow::anyhow!("--step must be positive, got {s}")));
                }
            }
            prepare(&out)?;
            let args = examples::ExampleArgs { id, step, seed };
            let report = examples::run(&args, &out).map_err(Failure::Run)?;
            finish(&report, Some(&out))
        }
        Command::SolveFbvp { config, out } => {
            let cfg = fbvp::FbvpConfig::load(&config).map_err(Failure::Usage)?;
            cfg.validate().map_err(Failure::Usage)?;
            prepare(&out)?;
            let label = config.file_stem().map_or("fbvp".into(), |s| s.to_string_lossy().into_owned());
            let report = fbvp::run(&cfg, &label, &out).map_err(Failure::Run)?;
            finish(&report, Some(&out))
        }
        Command::Report { dir } => {
            let report = Report::read(&dir).map_err(Failure::Usage)?;
            finish(&report, None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
