//! `eqa`: trading-activity statistics pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use stages::Stage;

#[derive(Debug, Parser)]
#[command(name = "eqa", version, about = "Statistics of equity trading activity")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Trade files (CSV, optionally gzip-compressed).
    #[arg(long = "input", num_args = 1.., global = true)]
    inputs: Vec<PathBuf>,

    /// Session calendar, one ISO date per line.
    #[arg(long, global = true)]
    calendar: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Sampling intervals, e.g. 5m,30m,1d,5d,20d.
    #[arg(long, value_delimiter = ',', global = true)]
    intervals: Option<Vec<String>>,

    /// Minimum number of trading days for an instrument to be kept.
    #[arg(long, global = true)]
    min_days: Option<usize>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for synthetic series.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Aggregate trades into activity series.
    Ingest,
    /// Intraday pattern and deseasonalized series.
    Pattern,
    /// Distribution of trading value per interval.
    Dist,
    /// Growth-rate fluctuations versus initial value.
    Growth,
    /// Hurst exponents by detrended fluctuation analysis.
    Dfa,
    /// Compare beta with 1 - H on the data.
    Relation,
    /// Surrogate ensemble experiment for beta = 1 - H.
    Synth,
    /// Run ingest through relation.
    All,
}

impl From<Command> for Stage {
    fn from(c: Command) -> Self {
        match c {
            Command::Ingest => Stage::Ingest,
            Command::Pattern => Stage::Pattern,
            Command::Dist => Stage::Dist,
            Command::Growth => Stage::Growth,
            Command::Dfa => Stage::Dfa,
            Command::Relation => Stage::Relation,
            Command::Synth => Stage::Synth,
            Command::All => Stage::All,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let overrides = Overrides {
        config: cli.config,
        inputs: cli.inputs,
        calendar: cli.calendar,
        out: cli.out,
        intervals: cli.intervals,
        min_days: cli.min_days,
        threads: cli.threads,
        seed: cli.seed,
    };
    let result = RunConfig::load(overrides).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| error::CliError::Validation(e.to_string()))?;
        }
        stages::run(cli.command.into(), &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eqa: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
