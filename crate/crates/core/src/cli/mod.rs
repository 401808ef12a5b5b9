//! Command-line front end: configuration, the coefficient DSL, dispatch and
//! artifact output.

pub mod commands;
pub mod config;
pub mod dsl;
pub mod output;

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;
use thiserror::Error;

pub use commands::{run_command, Command, RunContext};
pub use config::ExperimentConfig;
pub use dsl::{parse_coeff_expr, print_coeff_expr, symbol_from_json, symbol_to_json, DslContext, DslError, SymbolDoc};
pub use output::{to_json_string, OutputDir};

use crate::clifford::CliffordError;
use crate::gauge::GaugeError;
use crate::geometry::GeometryError;
use crate::spectra::SpectraError;
use crate::symbols::SymbolError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("expression error: {0}")]
    Dsl(#[from] DslError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

macro_rules! numerical_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numerical(e.to_string())
            }
        })*
    };
}

numerical_from!(SymbolError, GaugeError, SpectraError, GeometryError, CliffordError);

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Dsl(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Dsl(_) => "expression",
            CliError::Numerical(_) => "numerical",
            CliError::Verification(_) => "verification",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"error": self.kind(), "message": self.to_string(), "exitCode": self.exit_code()})
    }
}

#[derive(Debug, Parser)]
#[command(name = "gaugecalc", version, about = "Symbol calculus, gauge transforms and periodic spectra")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seeds in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the config's `output` or `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "GAUGECALC_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub verbose: bool,
}

pub fn run(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = OutputDir::create(&dir)?;
    let rc = RunContext { seed: args.seed, verbose: args.verbose };
    run_command(args.command, &cfg, &out, &rc)
}

/// Process entry point; returns the exit code.
pub fn main_entry() -> i32 {
    let args = Args::parse();
    match run(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            println!("{}", serde_json::to_string(&e.to_json()).unwrap_or_default());
            e.exit_code()
        }
    }
}
