mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::Globals;
use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Gabor phase retrieval experiments: transforms, stability certificates,
/// sharpness curves and sampling plans.
#[derive(Debug, Parser)]
#[command(name = "gabor-phase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML); relative paths inside it are resolved
    /// against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for tables and summary.toml.
    #[arg(long, global = true, default_value = "gabor-phase-out")]
    out: PathBuf,

    /// Grid spacing in time-frequency units, overriding the config.
    #[arg(long, global = true)]
    grid_step: Option<f64>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Gabor transform and spectrogram of a signal on a grid.
    Transform,
    /// Stability certificate and graph of a cover.
    Certify,
    /// Growth of the stability ratio for the sharpness pair.
    Sharpness,
    /// Gauss product sampling plan and its achieved error.
    PlanSample,
    /// Phase retrieval from a spectrogram on a cover.
    Retrieve,
    /// Quick randomized checks of the numerics.
    Selftest,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let g = Globals {
        grid_step: cli.grid_step.map(config::check_step).transpose()?,
        seed: cli.seed,
    };
    let start = Instant::now();
    let report = match cli.command {
        Command::Transform => commands::transform(&cfg, g),
        Command::Certify => commands::certify(&cfg, g),
        Command::Sharpness => commands::sharpness(&cfg, g),
        Command::PlanSample => commands::plan_sample(&cfg, g),
        Command::Retrieve => commands::retrieve(&cfg, g),
        Command::Selftest => commands::selftest(&cfg, g),
    }?;
    report.write(&cli.out, start.elapsed())?;
    for (key, value) in &report.summary {
        println!("{key} = {value}");
    }
    match report.summary.get("failed").and_then(|v| v.as_integer()) {
        Some(n) if n > 0 => Err(CliError::SelfTest(n as usize)),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
