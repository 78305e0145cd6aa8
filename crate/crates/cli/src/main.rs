//! Command-line front end: parses one declarative TOML config, dispatches
//! to the engine, and writes CSV (authoritative) plus SVG (convenience)
//! outputs. Every command is a pure function of (config, seed): identical
//! inputs produce byte-identical files.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 validation tolerance breach.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dronesense::EvalMethod;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("validation breach: {0}")]
    Breach(String),
}

impl From<dronesense::Error> for AppError {
    fn from(e: dronesense::Error) -> Self {
        match e {
            dronesense::Error::InvalidParameter { .. } => AppError::Usage(e.to_string()),
            _ => AppError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dronesense",
    version,
    about = "Detection analysis for RSS-based drone sensing in interference-limited networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic (and optionally empirical) ROC curves
    Roc(RunArgs),
    /// Network-average detection probability across a density range
    SweepDensity(RunArgs),
    /// Critical-density search under a false-alarm constraint
    Optimize(RunArgs),
    /// Signal-level simulator versus the analytic detector
    Validate(RunArgs),
    /// Phase moment xi(b_I) across the path-loss exponent range
    XiTable(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides DRONESENSE_OUT and the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides DRONESENSE_SEED and the config)
    #[arg(long)]
    seed: Option<u64>,
    /// V-expectation route: exact quadrature (gamma_I = 4 only) or stable
    /// Monte Carlo
    #[arg(long, value_enum, default_value_t = MethodArg::Levy)]
    method: MethodArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Levy,
    Mc,
}

/// Everything a command needs beyond its config section.
pub struct RunContext {
    pub file: config::FileConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub method: EvalMethod,
}

fn resolve_context(args: &RunArgs) -> Result<RunContext, AppError> {
    let file = config::load(&args.config)?;

    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var("DRONESENSE_SEED") {
            Ok(v) => v.parse().map_err(|_| {
                AppError::Usage(format!("DRONESENSE_SEED is not a valid seed: {v:?}"))
            })?,
            Err(_) => file.seed.unwrap_or(0),
        },
    };

    let out_dir = args
        .out
        .clone()
        .or_else(|| std::env::var("DRONESENSE_OUT").ok().map(PathBuf::from))
        .or_else(|| file.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        AppError::Usage(format!("cannot create out dir {}: {e}", out_dir.display()))
    })?;

    let method = match args.method {
        MethodArg::Levy => EvalMethod::LevyQuadrature,
        MethodArg::Mc => EvalMethod::StableMonteCarlo {
            samples: file.mc.samples(),
            seed,
        },
    };

    Ok(RunContext {
        file,
        out_dir,
        seed,
        method,
    })
}

fn run() -> Result<(), AppError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(AppError::Usage(e.to_string()));
        }
    };
    match &cli.command {
        Command::Roc(a) => commands::roc(&resolve_context(a)?),
        Command::SweepDensity(a) => commands::sweep_density(&resolve_context(a)?),
        Command::Optimize(a) => commands::optimize(&resolve_context(a)?),
        Command::Validate(a) => commands::validate(&resolve_context(a)?),
        Command::XiTable(a) => commands::xi_table(&resolve_context(a)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                AppError::Usage(_) => 1,
                AppError::Numerical(_) => 2,
                AppError::Breach(_) => 3,
            })
        }
    }
}
