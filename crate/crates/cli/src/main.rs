//! `delayopt`: optimal entry and exit triggers under implementation delay.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_params, ParamFlags};
use error::CliError;
use output::{Format, Sink};

#[derive(Debug, Parser)]
#[command(name = "delayopt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for triggers, coefficients and J(p0).
    Solve(RunArgs),
    /// Tabulate G, H and both obstacles over a price range.
    Table(RunArgs),
    /// Simulate the optimal rules by Monte Carlo.
    Simulate(RunArgs),
    /// Run Monte Carlo, finite-difference, dominance and transform checks.
    Verify(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Flat JSON object with the model parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write data here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo path count.
    #[arg(long)]
    paths: Option<usize>,
    /// Monte Carlo time step; must divide the delay.
    #[arg(long)]
    dt: Option<f64>,
    /// Monte Carlo horizon; defaults to the truncation rule.
    #[arg(long)]
    tmax: Option<f64>,
    /// Finest finite-difference grid (nodes).
    #[arg(long)]
    grid: Option<usize>,
    /// Lower price of the table or FD error window.
    #[arg(long)]
    pmin: Option<f64>,
    /// Upper price of the table or FD error window.
    #[arg(long)]
    pmax: Option<f64>,
    /// Table intervals (rows minus one).
    #[arg(long)]
    steps: Option<usize>,
    /// Replace the upper entry trigger of the simulated rule.
    #[arg(long = "override-pI2")]
    override_p_i2: Option<f64>,
    #[command(flatten)]
    params: ParamFlags,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Solve(args) | Command::Table(args) | Command::Simulate(args) | Command::Verify(args)) =
        &cli.command;
    let params = load_params(args.config.as_deref(), &args.params)?;
    let mut sink = Sink::open(args.out.as_deref())?;
    match &cli.command {
        Command::Solve(_) => commands::solve_cmd(&params, &mut sink, args.format),
        Command::Table(_) => commands::table_cmd(args, &params, &mut sink, args.format),
        Command::Simulate(_) => commands::simulate_cmd(args, &params, &mut sink, args.format),
        Command::Verify(_) => commands::verify_cmd(args, &params, &mut sink, args.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("delayopt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
