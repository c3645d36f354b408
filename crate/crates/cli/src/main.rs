//! `faw`: reward, game, simulation and countermeasure calculations from the
//! command line.

mod args;
mod cmd;
mod output;
mod reproduce;

use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::{Format, OutputArgs, Report};

/// Exit status for invalid inputs.
const EXIT_VALIDATION: u8 = 1;
/// Exit status when an iterative solver stopped before converging.
const EXIT_NOT_CONVERGED: u8 = 2;
/// Exit status when a reproduced fixture misses one of its checks.
const EXIT_FIXTURE_FAILED: u8 = 3;
/// Exit status for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "faw", version, about = "Fork-after-withholding attack analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Attacker and pool rewards against a single pool
    RewardSingle(cmd::analytic::RewardSingle),
    /// Attacker and pool rewards against several pools
    RewardMulti(cmd::analytic::RewardMulti),
    /// Reward-maximizing infiltration share against one pool
    OptimalTau(cmd::analytic::OptimalTau),
    /// Reward-maximizing split of infiltration power across pools
    OptimizeAlloc(cmd::analytic::OptimizeAlloc),
    /// Equilibrium of two pools attacking each other
    GameSolve(cmd::game::GameSolve),
    /// Equilibrium winner on an (alpha2, c) grid
    GameSweep(cmd::game::GameSweep),
    /// Monte Carlo run against one pool
    SimSingle(cmd::sim::SimSingle),
    /// Monte Carlo run against several pools
    SimMulti(cmd::sim::SimMulti),
    /// Monte Carlo run of the two-pool game
    SimGame(cmd::sim::SimGame),
    /// Limits on the fork win probability and related thresholds
    #[command(subcommand)]
    Bounds(cmd::bounds::Bounds),
    /// Rewards under pool-side countermeasures
    #[command(subcommand)]
    Counter(cmd::bounds::Counter),
    /// Re-run a built-in reference fixture and compare with stored values
    Reproduce(reproduce::Reproduce),
}

/// Reason a command produced no result.
#[derive(Debug)]
pub enum Failure {
    Core(faw_core::Error),
    Usage(String),
    Io(String),
}

impl From<faw_core::Error> for Failure {
    fn from(e: faw_core::Error) -> Self {
        Failure::Core(e)
    }
}

pub type CmdResult = Result<Report, Failure>;

fn run(command: &Command) -> CmdResult {
    match command {
        Command::RewardSingle(c) => c.run(),
        Command::RewardMulti(c) => c.run(),
        Command::OptimalTau(c) => c.run(),
        Command::OptimizeAlloc(c) => c.run(),
        Command::GameSolve(c) => c.run(),
        Command::GameSweep(c) => c.run(),
        Command::SimSingle(c) => c.run(),
        Command::SimMulti(c) => c.run(),
        Command::SimGame(c) => c.run(),
        Command::Bounds(c) => c.run(),
        Command::Counter(c) => c.run(),
        Command::Reproduce(c) => c.run(),
    }
}

fn default_format(command: &Command) -> Format {
    match command {
        Command::GameSweep(_) => Format::Csv,
        Command::Reproduce(_) => Format::Table,
        _ => Format::Json,
    }
}

fn emit(text: &str, out: &OutputArgs) -> Result<(), String> {
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let report = match run(&cli.command) {
        Ok(r) => r,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let format = cli.output.format.unwrap_or_else(|| default_format(&cli.command));
    if let Err(msg) = emit(&report.render(format), &cli.output) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    if !report.passed {
        return ExitCode::from(EXIT_FIXTURE_FAILED);
    }
    if !report.converged {
        eprintln!("warning: solver did not converge, results are best effort");
        return ExitCode::from(EXIT_NOT_CONVERGED);
    }
    ExitCode::SUCCESS
}
