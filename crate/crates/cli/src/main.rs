//! Command-line driver for the matrix-model spectral engine.
//!
//! Subcommands: `build`, `spectrum`, `fit`, `equilibrate`, `oracle`. Each
//! takes a JSON config (all fields defaulted), an output directory, an
//! optional seed override, and a thread count (accepted for interface
//! stability; execution is serial so that fixed config + seed reproduce
//! byte-identical outputs).

mod commands;
mod config;
mod csvio;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CommandContext;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "ymqm", version, about = "SU(2) Yang-Mills quantum mechanics: spectra, Regge fits, equilibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; missing fields take documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the solver / Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Affects speed only; outputs are identical. The
    /// current implementation is serial.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the truncated operators and write their Kronecker snapshot.
    Build(CommonArgs),
    /// Sweep, solve, classify by |q|, enumerate sectors, compute sizes.
    Spectrum(CommonArgs),
    /// Regge / Chew-Frautschi fits and figures from a spectrum CSV.
    Fit(FitArgs),
    /// Equilibration bounds, Haar statistics and trajectories.
    Equilibrate(FitArgs),
    /// Cross-check against the direct six-coordinate construction.
    Oracle(CommonArgs),
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Spectrum CSV produced by `ymqm spectrum` (default: <out>/spectrum.csv).
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

fn context(common: &CommonArgs) -> Result<CommandContext, String> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.solver.seed = seed;
    }
    if common.threads == 0 {
        return Err("--threads must be >= 1".into());
    }
    Ok(CommandContext {
        seed: config.solver.seed,
        config,
        out_dir: common.out.clone(),
        threads: common.threads,
    })
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Build(common) => commands::build::run(&context(common)?),
        Command::Spectrum(common) => commands::spectrum::run(&context(common)?),
        Command::Fit(args) => {
            let ctx = context(&args.common)?;
            let spectrum = args
                .spectrum
                .clone()
                .unwrap_or_else(|| commands::fit::default_spectrum_path(&ctx.out_dir));
            commands::fit::run(&ctx, &spectrum)
        }
        Command::Equilibrate(args) => {
            let ctx = context(&args.common)?;
            let spectrum = args
                .spectrum
                .clone()
                .unwrap_or_else(|| commands::fit::default_spectrum_path(&ctx.out_dir));
            commands::equilibrate::run(&ctx, &spectrum)
        }
        Command::Oracle(common) => commands::oracle::run(&context(common)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
