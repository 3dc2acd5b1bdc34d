//! Command-line front end for `vortwave`: TOML run configurations in,
//! CSV and report files out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod solution_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Options;
pub use config::RunConfig;
pub use error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "vortwave", version, about = "Steady water waves with vorticity and their flow-force bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Perturb the laminar seed with seeded noise (smoke tests).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Multiplies every verification tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Laminar streams: depth, Bernoulli constant, σ and κ.
    Laminar,
    /// Principal eigenvalue and eigenfunction of the linearized problem.
    Dispersion,
    /// Continuation in amplitude from a laminar flow.
    Solve,
    /// Flux function of a stored solution.
    Flux,
    /// Flow-force bounds and identities on a stored solution.
    Verify,
}

pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    if !(cli.tol_scale > 0.0 && cli.tol_scale.is_finite()) {
        return Err(CliError::Config(format!(
            "--tol-scale must be positive, got {}",
            cli.tol_scale
        )));
    }
    let config = RunConfig::load(path)?;
    let opts = Options {
        out: cli.out.clone(),
        seed: cli.seed,
        tol_scale: cli.tol_scale,
    };
    match cli.command {
        Command::Laminar => commands::laminar(&config, &opts),
        Command::Dispersion => commands::dispersion(&config, &opts),
        Command::Solve => commands::solve(&config, &opts),
        Command::Flux => commands::flux(&config, &opts),
        Command::Verify => commands::verify(&config, &opts),
    }
}
