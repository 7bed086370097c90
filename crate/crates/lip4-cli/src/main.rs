//! `lip4` — spectral-norm bounds for matrices, convolutional layers and
//! whole networks, plus a benchmark harness for method comparisons.
//!
//! Exit codes: 0 success, 2 usage error, 3 input-format error, 4 numerical
//! failure.

mod bench;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "lip4",
    version,
    about = "Certified spectral-norm bounds for dense matrices and convolutional layers",
    after_help = "The LIP4_THREADS environment variable caps the worker pool (0 = auto)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the spectral norm of a dense matrix
    Matrix(commands::MatrixArgs),
    /// Bound the spectral norm of a convolutional layer
    Conv(commands::ConvArgs),
    /// Bound the Lipschitz constant of a whole network from a JSON spec
    Network(commands::NetworkArgs),
    /// Sweep synthetic problem grids and emit a CSV/JSON dataset
    Bench(bench::BenchArgs),
    /// Compare circular and zero padding bounds for one kernel
    Compare(commands::CompareArgs),
}

/// Error category carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad method names, inconsistent sizes: exit 2.
    Usage(String),
    /// Unreadable or malformed input files: exit 3.
    Input(String),
    /// Estimator failure (overflow, non-convergence): exit 4.
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<lip4::lipk::LipkError> for CliError {
    fn from(e: lip4::lipk::LipkError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<lip4::SpectralError> for CliError {
    fn from(e: lip4::SpectralError) -> Self {
        match e {
            lip4::SpectralError::NotSquare { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<lip4::ConvError> for CliError {
    fn from(e: lip4::ConvError) -> Self {
        match e {
            lip4::ConvError::Linalg(inner) => CliError::Numeric(inner.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<lip4::LinalgError> for CliError {
    fn from(e: lip4::LinalgError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<lip4::NetworkError> for CliError {
    fn from(e: lip4::NetworkError) -> Self {
        use lip4::NetworkError::*;
        match e {
            Spectral(inner) => inner.into(),
            Linalg(inner) => inner.into(),
            Conv { source, .. } => source.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_worker_pool() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.code());
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Matrix(args) => commands::run_matrix(args),
        Command::Conv(args) => commands::run_conv(args),
        Command::Network(args) => commands::run_network(args),
        Command::Bench(args) => bench::run_bench(args),
        Command::Compare(args) => commands::run_compare(args),
    }
}

/// Applies the `LIP4_THREADS` cap (0 or unset = auto-sized pool).
#[cfg(feature = "parallel")]
fn init_worker_pool() -> Result<(), CliError> {
    match std::env::var("LIP4_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Usage(format!("LIP4_THREADS: {e}"))),
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                CliError::Usage(format!("LIP4_THREADS must be an integer, got {raw:?}"))
            })?;
            if n == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn init_worker_pool() -> Result<(), CliError> {
    Ok(())
}
