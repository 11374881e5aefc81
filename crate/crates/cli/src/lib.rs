//! Command-line pipeline: prices to chaos index, series analytics and self-checks.
//!
//! Every subcommand writes into one output directory and finishes with a
//! `manifest.json` listing each artifact with its SHA-256 checksum.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigLayer, RunConfig};
pub use error::{CliError, ExitCode};

/// Environment variable capping worker threads.
pub const WORKERS_ENV: &str = "FCIX_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "fcix", version, about = "Financial chaos index pipeline")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Flat TOML config file; flags override its values.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub layer: ConfigLayer,
}

impl Common {
    fn resolve(self) -> Result<RunConfig, CliError> {
        RunConfig::load(self.layer, self.config.as_deref())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prices to daily and aggregated index files.
    Fcix(Common),
    /// Segmentation, entropy, long memory, VAR/IRF and dynamics over one or two series.
    Analyze {
        /// Series files (`value` or `date,value`); with two, the first is the target.
        #[arg(required = true, num_args = 1..=2)]
        series: Vec<PathBuf>,
        /// Run only these analyses.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<commands::Analysis>>,
        #[command(flatten)]
        common: Common,
    },
    /// Identity and condition-number self-check.
    Verify {
        /// Break consistency on purpose; the identity checks must then fail.
        #[arg(long)]
        perturb: bool,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Decomposition error and mean index across lags.
    LagReport {
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20")]
        lags: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Critical points and phase paths for explicit (or published) parameters.
    Dynamics(Common),
}

fn worker_count(cfg_workers: Option<usize>) -> Result<Option<usize>, CliError> {
    if cfg_workers.is_some() {
        return Ok(cfg_workers);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{WORKERS_ENV}=`{raw}` must be a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn in_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs one parsed command, printing its human-readable result to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fcix(common) => {
            let cfg = common.resolve()?;
            let out = in_pool(worker_count(cfg.workers)?, || commands::cmd_fcix(&cfg))??;
            println!(
                "{} rows, rel_error {:.3e}, {} artifacts in {}",
                out.summary.horizon,
                out.summary.rel_error,
                out.manifest.artifacts.len(),
                cfg.output.display()
            );
        }
        Command::Analyze { series, only, common } => {
            let cfg = common.resolve()?;
            let out = in_pool(worker_count(cfg.workers)?, || {
                commands::cmd_analyze(&cfg, &series, only.as_deref())
            })??;
            println!("{} artifacts in {}", out.manifest.artifacts.len(), cfg.output.display());
            out.into_result()?;
        }
        Command::Verify { perturb, json } => {
            let report = in_pool(worker_count(None)?, || commands::cmd_verify(perturb))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
            } else {
                print!("{}", report.table());
            }
            report.into_result()?;
        }
        Command::LagReport { lags, common } => {
            let cfg = common.resolve()?;
            let report = in_pool(worker_count(cfg.workers)?, || commands::cmd_lag_report(&cfg, &lags))??;
            for p in &report.points {
                println!("lag {:>3}  epsilon {:.4e}  psi_bar {:.4e}", p.lag, p.epsilon, p.psi_bar);
            }
        }
        Command::Dynamics(common) => {
            let cfg = common.resolve()?;
            let report = in_pool(worker_count(cfg.workers)?, || commands::cmd_dynamics(&cfg))??;
            for cp in &report.critical_points {
                println!(
                    "({:.6}, {:.6})  {}  stable {} unstable {} center {}",
                    cp.f, cp.v, cp.classification, cp.dim_stable, cp.dim_unstable, cp.dim_center
                );
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs, reports errors on stderr and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::Usage as i32 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_target(false).try_init();
    match run(cli) {
        Ok(()) => ExitCode::Success as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    }
}
