//! `bktc`: price, Greeks, valuation adjustments and parameter sweeps from a
//! JSON scenario file.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ScenarioConfig, DEFAULT_OUTPUT_DIR};
use error::CliError;

/// Environment variable capping the number of worker threads.
const MAX_WORKERS_VAR: &str = "BKTC_MAX_WORKERS";

#[derive(Parser)]
#[command(
    version,
    about = "Counterparty-risk and transaction-cost option pricing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write surface.csv; print the price at the strike.
    Price(Args),
    /// Write greeks.csv (delta, gamma, vega, rho).
    Greeks(Args),
    /// Write cva.csv (price minus the risk-free price).
    Cva(Args),
    /// Re-solve across the configured parameter values; write sweep.csv.
    Sweep(Args),
    /// Print the parameter conditions with the numbers behind them.
    Validate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(MAX_WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config {
            field: Some(MAX_WORKERS_VAR.into()),
            reason: format!("expected a positive integer, got `{raw}`"),
        })?;
    // Only fails if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_workers()?;
    let (Command::Price(args)
    | Command::Greeks(args)
    | Command::Cva(args)
    | Command::Sweep(args)
    | Command::Validate(args)) = &cli.command;
    let cfg = ScenarioConfig::load(&args.config)?;
    cfg.validate()?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    if let Command::Validate(_) = cli.command {
        return commands::validate(&cfg);
    }
    commands::prepare_output(&cfg, &dir)?;
    match cli.command {
        Command::Price(_) => commands::price(&cfg, &dir),
        Command::Greeks(_) => commands::greeks(&cfg, &dir),
        Command::Cva(_) => commands::cva(&cfg, &dir),
        Command::Sweep(_) => commands::run_sweep(&cfg, &dir),
        Command::Validate(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
