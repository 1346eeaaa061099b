//! Command-line driver for the gradient-descent factorization experiments:
//! trajectory demos, parameter sweeps, the closed-form schedule report, and
//! the decoupled scalar-dynamics demo.
//!
//! Every run is reproducible: all randomness derives from one master seed
//! through a splittable counter RNG, results are written as documented CSV
//! plus self-contained SVG, and output bytes are identical at any
//! `--parallel` level (parallelism only maps independent jobs over a
//! thread pool; each job owns its seed).

pub mod commands;
pub mod config;
pub mod csvout;
pub mod error;
pub mod jobs;
pub mod seeds;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::ConfigMap;
use error::{CliError, Result};

/// Shared state handed to every command: the merged config (file then
/// flags), the artifact directory (None = compute only), and the worker
/// thread count for sweep jobs.
pub struct RunContext {
    pub config: ConfigMap,
    pub out_dir: Option<PathBuf>,
    pub parallel: usize,
}

#[derive(Parser)]
#[command(
    name = "gdfactor",
    version,
    about = "Gradient descent on factored low-rank approximation: demos, sweeps, and schedule reports",
    long_about = "Experiments around gradient descent on F G^T ~ X from small random \
                  initializations: overfitting/early-stopping demos, sweeps over \
                  initialization size, spectral gap, and dimension, the closed-form \
                  stepsize/initialization schedule, and the decoupled scalar dynamics of \
                  the diagonal PSD case. All runs are deterministic given the master seed."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Config file: `key = value` lines, '#' comments, [a, b] lists
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/SVG artifacts (default: ./gdfactor-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the per-point trial count
    #[arg(long)]
    pub trials: Option<u64>,
    /// Override the master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for independent jobs (default 1; results are
    /// byte-identical at any level)
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Train vs test error trajectories showing the early-stopping window
    OverfitDemo(CommonArgs),
    /// Small vs moderate initialization on an exactly low-rank target
    InitCompare(CommonArgs),
    /// Smallest relative error as the initialization size shrinks
    SweepRho(CommonArgs),
    /// Error and stopping time as the relative spectral gap varies
    SweepGap(CommonArgs),
    /// Error across problem dimensions at a fixed spectrum
    SweepDim(CommonArgs),
    /// Dimension sweep repeated across several (rho, delta, kappa) settings
    SweepStepdim(CommonArgs),
    /// Print the closed-form caps, phase counts, and error bound
    Schedule(CommonArgs),
    /// Decoupled scalar dynamics run to its scheduled stopping time
    PsdToy(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::OverfitDemo(a)
            | Command::InitCompare(a)
            | Command::SweepRho(a)
            | Command::SweepGap(a)
            | Command::SweepDim(a)
            | Command::SweepStepdim(a)
            | Command::Schedule(a)
            | Command::PsdToy(a) => a,
        }
    }
}

fn build_context(args: &CommonArgs) -> Result<RunContext> {
    let mut config = match &args.config {
        Some(path) => ConfigMap::from_file(path)?,
        None => ConfigMap::empty(),
    };
    if let Some(trials) = args.trials {
        config.set("trials", trials);
    }
    if let Some(seed) = args.seed {
        config.set("seed", seed);
    }
    let parallel = args.parallel.unwrap_or(1);
    if parallel == 0 {
        return Err(CliError::config("--parallel must be at least 1"));
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("gdfactor-out"));
    std::fs::create_dir_all(&out).map_err(|e| {
        CliError::config(format!(
            "cannot create output directory {}: {e}",
            out.display()
        ))
    })?;
    Ok(RunContext {
        config,
        out_dir: Some(out),
        parallel,
    })
}

/// Runs the parsed command line to completion (artifacts, summaries,
/// result assertions). Errors carry the process exit code.
pub fn execute(cli: &Cli) -> Result<()> {
    let ctx = build_context(cli.command.common())?;
    match &cli.command {
        Command::OverfitDemo(_) => {
            commands::demo::cmd_overfit_demo(&ctx)?;
        }
        Command::InitCompare(_) => {
            commands::init_compare::cmd_init_compare(&ctx)?;
        }
        Command::SweepRho(_) => {
            commands::sweep::cmd_sweep_rho(&ctx)?;
        }
        Command::SweepGap(_) => {
            commands::sweep::cmd_sweep_gap(&ctx)?;
        }
        Command::SweepDim(_) => {
            commands::sweep::cmd_sweep_dim(&ctx)?;
        }
        Command::SweepStepdim(_) => {
            commands::sweep::cmd_sweep_stepdim(&ctx)?;
        }
        Command::Schedule(_) => {
            commands::schedule_report::cmd_schedule(&ctx)?;
        }
        Command::PsdToy(_) => {
            commands::psd::cmd_psd_toy(&ctx)?;
        }
    }
    Ok(())
}
