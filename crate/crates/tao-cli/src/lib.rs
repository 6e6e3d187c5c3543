//! Command-line front end for the offloading simulator: solve per-device
//! local-serve probabilities, run single simulations, compare strategies over
//! Monte-Carlo ensembles, and replicate the full figure set.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Overrides;
use error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "tao",
    about = "Thermal-aware offloading: chance-constrained policy solver and simulator",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the per-device local-serve probability alpha* and report margins
    SolveAlpha(CommonArgs),
    /// Run one seeded simulation per strategy and export traces
    Simulate(CommonArgs),
    /// Compare strategies over a Monte-Carlo ensemble
    Compare(CommonArgs),
    /// Produce the full replication artifact set (figures + CSVs)
    Replicate(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    BusyServer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config file (TOML)
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,

    /// Output directory (overrides the config)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Base seed (overrides the config)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Ensemble size (overrides the config)
    #[arg(long)]
    pub runs: Option<usize>,

    /// Confidence level omega in (0, 1) (overrides the config)
    #[arg(long)]
    pub omega: Option<f64>,

    /// Load model for the chance constraints (overrides the config)
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Comma-separated strategy list, e.g. "tao,sota" (overrides the config)
    #[arg(long, value_name = "NAMES")]
    pub strategy: Option<String>,

    /// Emit SVG plots next to the CSVs
    #[arg(long, value_enum)]
    pub plots: Option<Toggle>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            runs: self.runs,
            omega: self.omega,
            mode: self.mode.map(|m| {
                match m {
                    ModeArg::Paper => "paper",
                    ModeArg::BusyServer => "busy_server",
                }
                .to_string()
            }),
            strategy: self.strategy.clone(),
            plots: self.plots.map(|p| p == Toggle::On),
        }
    }
}

/// Dispatch a parsed command line. Errors carry the process exit code.
pub fn run(cli: &Cli) -> CliResult<()> {
    let args = match &cli.command {
        Command::SolveAlpha(a) | Command::Simulate(a) | Command::Compare(a) | Command::Replicate(a) => a,
    };
    let exp = config::load_experiment(&args.config, &args.overrides())?;
    match &cli.command {
        Command::SolveAlpha(_) => commands::cmd_solve_alpha(&exp),
        Command::Simulate(_) => commands::cmd_simulate(&exp),
        Command::Compare(_) => commands::cmd_compare(&exp),
        Command::Replicate(_) => commands::cmd_replicate(&exp),
    }
}
