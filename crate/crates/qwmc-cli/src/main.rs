//! qwmc: quantum-walk Monte Carlo photon-transport experiments.
//!
//! Every flag falls back to a value from the optional `--config` key=value
//! file, then to the built-in defaults, which mirror the headline run
//! parameters (10 MeV photons in water, 1 cm steps, 15 steps, 500k quantum
//! shots, 1M classical shots, epsilon 0.01, alpha 0.05, 30 shots/round).
//! All randomness flows from one `--seed` through a documented splitting
//! scheme, and outputs are byte-stable for a fixed seed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;

/// Environment variable limiting the worker-thread count.
const THREADS_VAR: &str = "QWMC_THREADS";

#[derive(Parser)]
#[command(
    name = "qwmc",
    version,
    about = "Quantum-walk Monte Carlo toolkit for photon transport",
    after_help = "Any flag may instead be supplied by a --config file with one \
                  key=value pair per line ('#' starts a comment); explicit flags \
                  win.  QWMC_THREADS caps the worker-thread count (builds without \
                  the `parallel` feature ignore it)."
)]
struct Cli {
    /// Key=value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the per-step interaction table for the configured beam.
    Physics(PhysicsArgs),
    /// Run the quantum walk; emit exact and sampled outcome frequencies.
    Walk(WalkArgs),
    /// Classical Monte Carlo transport over the same step schedule.
    Mc(McArgs),
    /// Estimate the survival amplitude by iterative amplitude estimation.
    Iqae(IqaeArgs),
    /// Measure estimator error against oracle-query budgets.
    Scaling(ScalingArgs),
    /// Compare two outcome-distribution CSV files.
    Compare(CompareArgs),
    /// Reproduce the headline experiments with default parameters.
    Repro(ReproArgs),
}

#[derive(Args)]
struct PhysicsArgs {
    /// Photon energy in MeV.
    #[arg(long)]
    energy: Option<f64>,
    /// Step length in cm.
    #[arg(long)]
    dx: Option<f64>,
    /// Number of slab steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WalkArgs {
    /// Number of slab steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Photon energy in MeV.
    #[arg(long)]
    energy: Option<f64>,
    /// Step length in cm.
    #[arg(long)]
    dx: Option<f64>,
    /// Measurement shots drawn from the walk state.
    #[arg(long)]
    shots: Option<u64>,
    /// Top-level random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// Number of slab steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Photon energy in MeV.
    #[arg(long)]
    energy: Option<f64>,
    /// Step length in cm.
    #[arg(long)]
    dx: Option<f64>,
    /// Simulated photon trajectories.
    #[arg(long)]
    shots: Option<u64>,
    /// Top-level random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IqaeArgs {
    /// Number of slab steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Good-state depth threshold (defaults to the step count: survival).
    #[arg(long)]
    threshold: Option<usize>,
    /// Photon energy in MeV.
    #[arg(long)]
    energy: Option<f64>,
    /// Step length in cm.
    #[arg(long)]
    dx: Option<f64>,
    /// Target half-width of the amplitude interval.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Allowed probability that the interval misses the amplitude.
    #[arg(long)]
    alpha: Option<f64>,
    /// Measurement shots fired per estimation round.
    #[arg(long = "shots-per-round")]
    shots_per_round: Option<u64>,
    /// Top-level random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Comma-separated target precisions.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Independent replications per precision.
    #[arg(long)]
    reps: Option<usize>,
    /// Number of slab steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Photon energy in MeV.
    #[arg(long)]
    energy: Option<f64>,
    /// Step length in cm.
    #[arg(long)]
    dx: Option<f64>,
    /// Top-level random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// First distribution CSV (the reference side of the divergence).
    #[arg(long)]
    a: Option<PathBuf>,
    /// Second distribution CSV.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Output JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Reproduce the distribution-agreement table (15 and 31 steps).
    #[arg(long)]
    table1: bool,
    /// Reproduce the error-versus-queries scaling study.
    #[arg(long)]
    fig5: bool,
    /// Top-level random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving the report files.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(summary) => {
            // `physics` without --out already printed its table to stdout
            // and returns an empty summary to keep that output parseable.
            if !summary.is_empty() {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<String> {
    let cli = Cli::parse();
    init_thread_pool()?;
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Physics(args) => commands::physics(&args, &settings),
        Command::Walk(args) => commands::walk(&args, &settings),
        Command::Mc(args) => commands::mc(&args, &settings),
        Command::Iqae(args) => commands::iqae(&args, &settings),
        Command::Scaling(args) => commands::scaling(&args, &settings),
        Command::Compare(args) => commands::compare(&args, &settings),
        Command::Repro(args) => commands::repro(&args, &settings),
    }
}

/// Reads and validates the thread-count cap from the environment.
fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(value) => match value.parse::<usize>() {
            Ok(threads) if threads > 0 => Ok(Some(threads)),
            _ => anyhow::bail!("{THREADS_VAR} must be a positive integer, got {value:?}"),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow::anyhow!("{THREADS_VAR} is not valid unicode: {e}")),
    }
}

/// Applies the thread-count cap before any parallel work starts.  Results
/// never depend on the pool size; the variable only bounds resource use,
/// and builds without the `parallel` feature validate it but run on one
/// thread regardless.
fn init_thread_pool() -> anyhow::Result<()> {
    let cap = thread_cap()?;
    #[cfg(feature = "parallel")]
    if let Some(threads) = cap {
        use anyhow::Context;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool already initialized")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cap;
    Ok(())
}
