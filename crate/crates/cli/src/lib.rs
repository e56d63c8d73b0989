//! Command-line front end: `verify`, `optimize`, `sweep` and `spike-demo`,
//! each driven by a JSON config and writing CSV or JSON output.
//!
//! Exit codes: 0 success, 1 runtime or check failure, 2 configuration error.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

#[derive(Debug, Parser)]
#[command(name = "spikezo", version, about = "Zero-order optimization from spike-timing plasticity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Monte Carlo and quadrature checks; writes a JSON report.
    Verify(CommonArgs),
    /// Run optimizers over replicates; writes a CSV trace.
    Optimize(CommonArgs),
    /// Estimator variance against dimension; writes CSV plus a JSON summary.
    Sweep(CommonArgs),
    /// Simulate spiking trials with plasticity; writes spike times and weights.
    SpikeDemo(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config; the built-in default is used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for replicate fan-out.
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent configuration; nothing was computed.
    Config(String),
    /// A computation or I/O step failed.
    Runtime(String),
    /// Everything ran but at least one check failed.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::ChecksFailed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid config: {msg}"),
            CliError::Runtime(msg) => f.write_str(msg),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Verify(args) => commands::verify::run(args),
        Command::Optimize(args) => commands::optimize::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
        Command::SpikeDemo(args) => commands::spike_demo::run(args),
    }
}
