//! Experiment runner for secrecy rate-distortion with list and henchman
//! adversaries: region curves, cipher simulations, bound suites and
//! codebook-compression decay.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod output;
pub mod region;
pub mod simulate;
pub mod subproblem;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use error::CliError;

/// Output directory used when neither `--out` nor the override is given.
pub const DEFAULT_OUT_DIR: &str = "henchman-out";
pub const OUT_DIR_ENV: &str = "HENCHMAN_OUT_DIR";
pub const JOBS_ENV: &str = "HENCHMAN_JOBS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "henchman", version, about = "Secrecy rate-distortion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Offset added to every seed in the config.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output directory (overrides HENCHMAN_OUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads (overrides HENCHMAN_JOBS; default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sweep the achievable-region boundary.
    Region,
    /// Cipher and attack Monte Carlo, one record per seed.
    Simulate,
    /// Bound suites with a pass/fail table.
    Verify,
    /// Codebook-compression decay table.
    Subproblem,
}

/// Settings resolved from flags and environment.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub jobs: Option<usize>,
}

impl RunContext {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let out_dir = match &cli.out {
            Some(p) => p.clone(),
            None => std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        };
        let jobs = match cli.jobs {
            Some(j) => Some(j),
            None => match std::env::var(JOBS_ENV) {
                Ok(v) => Some(
                    v.parse()
                        .map_err(|_| CliError::Config(format!("{JOBS_ENV}={v:?} is not a thread count")))?,
                ),
                Err(_) => None,
            },
        };
        if jobs == Some(0) {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        Ok(Self {
            out_dir,
            seed: cli.seed,
            format: cli.format,
            jobs,
        })
    }
}

/// What a run wrote and whether every hard check held.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Runs one subcommand. Work is spread over a dedicated pool whose results
/// are collected in input order, so output does not depend on `--jobs`.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let ctx = RunContext::resolve(cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = ctx.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Region => region::run(&require(cli)?, &ctx),
        Command::Simulate => simulate::run(&require(cli)?, &ctx),
        Command::Verify => {
            let cfg = match &cli.config {
                Some(p) => config::load(p)?,
                None => config::VerifyConfig::default(),
            };
            verify::run(&cfg, &ctx)
        }
        Command::Subproblem => subproblem::run(&require(cli)?, &ctx),
    })
}

fn require<T: for<'de> serde::Deserialize<'de>>(cli: &Cli) -> Result<T, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this subcommand needs --config".into()))?;
    config::load(path)
}
