//! Experiment runner: reproduces the Bell magic numerics and writes CSV
//! data plus a JSON summary per command.

mod commands;
mod config;

use anyhow::Context;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::{overlay, DiscriminateOpts, ExperimentConfig, StateOpts, SweepOpts, TrainOpts};

/// Invalid arguments or configuration; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "bell-magic", version, about = "Bell magic experiments")]
struct Cli {
    /// Base RNG seed; identical seeds give byte-identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Versioned JSON config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and estimated Bell magic of one state.
    Magic(StateOpts),
    /// Misclassification rates of magic-vs-stabilizer discrimination.
    Discriminate(DiscriminateOpts),
    /// Variational maximization of the Bell magic.
    Train(TrainOpts),
    /// Meyer-Wallach entanglement from Bell samples.
    Entangle(StateOpts),
    /// Estimation error over noise levels and sample counts.
    Sweep(SweepOpts),
}

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    use bell_magic::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<E>() {
        Some(E::InvalidInput(_) | E::DimensionMismatch { .. } | E::Parse(_)) => EXIT_USAGE,
        Some(
            E::NotNormalized(_) | E::InvalidDensityMatrix(_) | E::InsufficientSamples { .. } | E::Mitigation(_),
        ) => EXIT_NUMERICAL,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig { version: config::CONFIG_VERSION, ..Default::default() },
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let out = cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("."));
    if let Some(threads) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring thread pool")?;
    }
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    match cli.command {
        Command::Magic(o) => commands::magic(&overlay(o, file.magic)?, seed, &out),
        Command::Entangle(o) => commands::entangle(&overlay(o, file.entangle)?, seed, &out),
        Command::Discriminate(o) => commands::discriminate(&overlay(o, file.discriminate)?, seed, &out),
        Command::Train(o) => commands::train(&overlay(o, file.train)?, seed, &out),
        Command::Sweep(o) => commands::sweep_cmd(&overlay(o, file.sweep)?, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
