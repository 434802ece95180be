//! Command-line experiments for the capped SABR volatility model.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{OutputFormat, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] sabr_vix_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 2 for configuration and precondition problems, 3 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Precondition(_) => 2,
            CliError::Numerical(sabr_vix_core::Error::InvalidParameter { .. })
            | CliError::Numerical(sabr_vix_core::Error::AssumptionViolated { .. }) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sabr-vix",
    version,
    about = "VIX futures and options under SABR with capped volatility"
)]
pub struct Cli {
    /// JSON config file; missing fields take the reference defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `mc.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `format`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale function, Feller explosion test, boundary class and martingale check.
    Diagnose,
    /// Cap switch level and Monte Carlo forward for rho in {-0.7, 0, 0.7}.
    #[command(name = "table1", visible_alias = "forwards")]
    Table1,
    /// Monte Carlo smile with the short-maturity limit alongside.
    Smile {
        /// Option maturity in years (default: `mc.horizon`).
        #[arg(long)]
        maturity: Option<f64>,
    },
    /// Decay of -T log C(T, K) towards the rate function along `maturities`.
    Converge {
        #[arg(long, default_value_t = 0.15)]
        strike: f64,
    },
    /// Short-maturity implied vol and rate function on the strike grid.
    Asymptotic,
    /// Prints the effective configuration as JSON.
    Config,
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.mc.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(format) = self.format {
            cfg.format = format;
        }
        if self.threads == Some(0) {
            return Err(CliError::Config(vec![
                "--threads: must be at least 1".into()
            ]));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command and returns the path of the file it wrote, if any.
pub fn run(cli: &Cli) -> Result<Option<PathBuf>, CliError> {
    let cfg = cli.resolve_config()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| execute(&cli.command, &cfg))
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<Option<PathBuf>, CliError> {
    let ext = match cfg.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let (stem, bytes) = match command {
        Command::Config => {
            println!("{}", cfg.to_json());
            return Ok(None);
        }
        Command::Diagnose => (
            "diagnose",
            output::render_diagnosis(&commands::diagnose(cfg)?, cfg.format),
        ),
        Command::Table1 => (
            "table1",
            output::render_forward_table(&commands::forward_table(cfg)?, cfg.format),
        ),
        Command::Smile { maturity } => {
            let (run, _) = commands::smile(cfg, maturity.unwrap_or(cfg.mc.horizon))?;
            ("smile", output::render_smile(&run, cfg.format))
        }
        Command::Converge { strike } => (
            "converge",
            output::render_convergence(&commands::converge(cfg, *strike)?, cfg.format),
        ),
        Command::Asymptotic => (
            "asymptotic",
            output::render_asymptotic(&commands::asymptotic(cfg)?, cfg.format),
        ),
    };
    let path = output::write_atomic(&cfg.output_dir, &format!("{stem}.{ext}"), &bytes)?;
    Ok(Some(path))
}
