//! `sarg04`: key-rate bounds and operating-point sweeps from the command line.
//!
//! Settings are layered: built-in defaults, then `--config FILE`, then the
//! `QKD_NMAX` environment variable, then explicit flags.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sarg04_core::lower_bound::Protocol;
use sarg04_core::Execution;

use commands::Outcome;
use config::{Format, GridSpec, RunConfig, N_MAX_ENV};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sarg04", version, about = "SARG04 key-rate bounds and optimal operating points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-photon lower bound and its error threshold.
    Lower(LowerArgs),
    /// Upper bound under the optimal incoherent attack.
    Upper(UpperArgs),
    /// Optimized secret-key rate versus distance for an attenuated laser.
    Practical(PracticalArgs),
    /// Lower and upper bounds of SARG04 against BB84 on a QBER grid.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat `key = value` file; flags take precedence over its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to FILE instead of standard output.
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

impl CommonArgs {
    fn layer(&self) -> RunConfig {
        RunConfig { format: self.format, output: self.output.clone(), ..RunConfig::default() }
    }
}

#[derive(Debug, Args)]
struct LowerArgs {
    /// sarg04, sarg04-2set or bb84.
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long)]
    qber: Option<f64>,
    /// Tabulate the rate on `start:end:step`.
    #[arg(long, value_name = "START:END:STEP")]
    qber_grid: Option<GridSpec>,
    /// Fix the flip probability to zero.
    #[arg(long)]
    no_preprocessing: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct UpperArgs {
    #[arg(long)]
    qber: Option<f64>,
    #[arg(long, value_name = "START:END:STEP")]
    qber_grid: Option<GridSpec>,
    /// Also report the QBER where the rate vanishes.
    #[arg(long)]
    find_threshold: bool,
    #[arg(long)]
    no_preprocessing: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct PracticalArgs {
    /// Distances in km as `start:end:step`.
    #[arg(long, value_name = "START:END:STEP")]
    sweep: Option<GridSpec>,
    #[arg(long)]
    visibility: Option<f64>,
    /// Fibre loss in dB/km.
    #[arg(long)]
    alpha: Option<f64>,
    /// Detector efficiency.
    #[arg(long)]
    eta: Option<f64>,
    /// Dark-count probability per detector and gate.
    #[arg(long)]
    p_dark: Option<f64>,
    /// Largest photon number Eve acts on.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    no_preprocessing: bool,
    /// Evaluate distances one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, value_name = "START:END:STEP")]
    qber_grid: Option<GridSpec>,
    /// Tabulate the QBER of both protocols against visibility instead.
    #[arg(long, value_name = "START:END:STEP")]
    visibility_grid: Option<GridSpec>,
    #[command(flatten)]
    common: CommonArgs,
}

fn preprocessing_flag(no_preprocessing: bool) -> Option<bool> {
    no_preprocessing.then_some(false)
}

fn resolve(common: &CommonArgs, flags: RunConfig) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let env_value = std::env::var(N_MAX_ENV).ok();
    let env = RunConfig::from_env_value(env_value.as_deref())?;
    let cfg = file.overlay(env).overlay(common.layer()).overlay(flags);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, outcome) = match cli.command {
        Command::Lower(a) => {
            let flags = RunConfig {
                protocol: a.protocol,
                qber: a.qber,
                qber_grid: a.qber_grid,
                preprocessing: preprocessing_flag(a.no_preprocessing),
                ..RunConfig::default()
            };
            let cfg = resolve(&a.common, flags)?;
            let out = commands::lower(&cfg)?;
            (cfg, out)
        }
        Command::Upper(a) => {
            let flags = RunConfig {
                qber: a.qber,
                qber_grid: a.qber_grid,
                preprocessing: preprocessing_flag(a.no_preprocessing),
                ..RunConfig::default()
            };
            let cfg = resolve(&a.common, flags)?;
            let out = commands::upper(&cfg, a.find_threshold)?;
            (cfg, out)
        }
        Command::Practical(a) => {
            let mut flags = RunConfig {
                visibility: a.visibility,
                alpha: a.alpha,
                eta: a.eta,
                p_dark: a.p_dark,
                n_max: a.n_max,
                preprocessing: preprocessing_flag(a.no_preprocessing),
                ..RunConfig::default()
            };
            if let Some(g) = a.sweep {
                flags.set_sweep(g);
            }
            let cfg = resolve(&a.common, flags)?;
            let execution = if a.sequential { Execution::Sequential } else { Execution::Parallel };
            let out = commands::practical(&cfg, execution)?;
            (cfg, out)
        }
        Command::Compare(a) => {
            let flags = RunConfig {
                qber_grid: a.qber_grid,
                visibility_grid: a.visibility_grid,
                ..RunConfig::default()
            };
            let cfg = resolve(&a.common, flags)?;
            let out = commands::compare(&cfg)?;
            (cfg, out)
        }
    };
    let format = cfg.format_or_default();
    let text = match outcome {
        Outcome::Table(t) => t.render(format),
        Outcome::Report(r) => r.render(format),
    };
    output::emit(&text, cfg.output.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
