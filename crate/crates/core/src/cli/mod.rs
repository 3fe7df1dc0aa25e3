//! Batch driver: `verify`, `limit`, `budget` and `residual` subcommands.
//!
//! Exit codes are 0 when every check passes, 1 on a numeric tolerance
//! failure and 2 on a usage or configuration error. Reports are written as
//! JSON (`"schema": 1`) and/or CSV and contain no timestamps, so identical
//! inputs give byte-identical files.

mod config;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{
    BudgetConfig, DecayConfig, ExperimentConfig, Family, FamilyConfig, Format, OutputConfig, Overrides, ProbeConfig,
    ResidualConfig, RuleConfig, SphereKind, VerifyConfig, WeylData,
};
pub use report::{cmd_budget, cmd_limit, cmd_residual, cmd_verify, Outcome};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(name = "zeromode", version, about = "Zero modes of massless Dirac and Weyl-Dirac operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Finite-difference residuals, Assumption (A) audit, decay envelope and limit-integral quadrature.
    Verify,
    /// Limit vectors, radial scans, uniformity in ω and the zero-limit equivalence.
    Limit,
    /// Three-region error budget over an (r, R0) grid.
    Budget,
    /// Fixed-point residuals |f − T f| at sample points.
    Residual,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Radial truncation radius.
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    /// Number of nodes of the sphere grid.
    #[arg(long, global = true)]
    pub sphere_points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub radial_order: Option<usize>,
    #[arg(long, global = true)]
    pub adapt_depth: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            tol: self.tol,
            r_max: self.rmax,
            sphere_points: self.sphere_points,
            seed: self.seed,
            format: self.format,
            radial_order: self.radial_order,
            adapt_depth: self.adapt_depth,
        }
    }
}

/// Loads the configuration (file, then flags) and validates it.
pub fn resolve_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&common.overrides());
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Verify => cmd_verify(cfg),
        Command::Limit => cmd_limit(cfg),
        Command::Budget => cmd_budget(cfg),
        Command::Residual => cmd_residual(cfg),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let cfg = match resolve_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, &cfg) {
        Ok(outcome) => {
            for line in &outcome.failures {
                eprintln!("FAIL {line}");
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
