//! Command-line front end. Every subcommand reads a [`RunConfig`], writes
//! CSV, JSON and SVG artifacts under the output directory and returns an
//! exit status:
//!
//! * `0` success
//! * `1` a verification check failed
//! * `2` configuration error (an error JSON with a `field` is printed)
//! * `3` a module rejected the inputs or failed numerically

mod commands;
pub mod config;
pub mod svg;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

pub use commands::{read_history, write_history, Context};
pub use config::{InitialCondition, RunConfig, ToleranceOverrides, SCHEMA_VERSION};
pub use verify::{run_suite, Check, VerifyReport};

use crate::backlund::BacklundError;
use crate::diffpoly::DiffPolyError;
use crate::frames::FrameError;
use crate::hamiltonian::HamiltonianError;
use crate::lax::LaxError;
use crate::vmkdv::VmkdvError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Vmkdv(#[from] VmkdvError),
    #[error(transparent)]
    Lax(#[from] LaxError),
    #[error(transparent)]
    Backlund(#[from] BacklundError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Vmkdv(_) => "vmkdv",
            CliError::Lax(_) => "lax",
            CliError::Backlund(BacklundError::EqualSpectralSquares { .. }) => "equal_spectral_squares",
            CliError::Backlund(_) => "backlund",
            CliError::Hamiltonian(_) => "hamiltonian",
            CliError::Frame(_) => "frames",
            CliError::DiffPoly(_) => "diffpoly",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Csv(_) => "csv",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Config { field, .. } = self {
            v["field"] = json!(field);
        }
        v
    }
}

#[derive(Debug, Parser)]
#[command(name = "airyflow", version, about = "Geometric Airy curve flows, vmKdV solitons and their transformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for random initial data (overrides the config).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evolve curvature, reconstruct curves and log conserved quantities.
    Evolve,
    /// Exact one- and multi-soliton curvatures and curves.
    Soliton,
    /// Apply a Bäcklund transformation to an evolved curve.
    Backlund,
    /// Rebuild curves from curvature snapshots.
    Reconstruct,
    /// Run the invariant suite and write a pass/fail report.
    Verify,
    /// Render SVG plots from the CSV artifacts of an earlier run.
    Export,
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli) -> i32 {
    let result = load(&cli).and_then(|ctx| match cli.command {
        Command::Evolve => commands::cmd_evolve(&ctx),
        Command::Soliton => commands::cmd_soliton(&ctx),
        Command::Backlund => commands::cmd_backlund(&ctx),
        Command::Reconstruct => commands::cmd_reconstruct(&ctx),
        Command::Verify => verify::cmd_verify(&ctx),
        Command::Export => commands::cmd_export(&ctx),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}

fn load(cli: &Cli) -> Result<Context, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let (Some(seed), InitialCondition::RandomSmooth { seed: s, .. }) = (cli.seed, &mut cfg.initial) {
        *s = seed;
    }
    Ok(Context { out: cfg.output_dir.clone(), seed: cli.seed, quiet: cli.quiet, cfg })
}
