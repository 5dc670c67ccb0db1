use std::path::PathBuf;
use std::process::ExitCode;

use biphoton_capacity::{Alignment, Basis};
use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{Overrides, RunConfig};

/// Mutual information and entanglement witnesses for pixel-detected
/// photon pairs.
#[derive(Debug, Parser)]
#[command(name = "biphoton", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Continuous-variable mutual information and source statistics.
    Theory,
    /// Exact pixel-pair joint distribution for one detector configuration.
    Matrix {
        /// Pixels per axis.
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[arg(long, default_value_t = Basis::Position)]
        basis: Basis,
        #[arg(long, default_value_t = Alignment::Aligned)]
        alignment: Alignment,
    },
    /// Exact and simulated mutual information over the configured resolutions.
    Sweep,
    /// Separability test from a position-basis and a momentum-basis count file.
    Witness { position: PathBuf, momentum: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<biphoton_capacity::Error> for CliError {
    fn from(e: biphoton_capacity::Error) -> Self {
        use biphoton_capacity::Error as E;
        match e {
            E::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            E::Io { .. } | E::Format { .. } => CliError::Io(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(&cli.overrides)?;
    let explicit_out = cli.overrides.out.is_some();
    match cli.command {
        Command::Theory => commands::theory(&cfg, explicit_out),
        Command::Matrix {
            resolution,
            basis,
            alignment,
        } => commands::matrix(&cfg, resolution, basis, alignment),
        Command::Sweep => commands::sweep(&cfg),
        Command::Witness { position, momentum } => commands::witness(&cfg, &position, &momentum, explicit_out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
