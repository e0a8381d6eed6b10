//! `staticarb`: static arbitrage checks and super-replication from the
//! command line.
//!
//! Exit codes: 0 success / arbitrage-free, 1 input error, 2 strict
//! arbitrage, 3 arbitrage (or super-replication precluded by arbitrage),
//! 4 law of one price fails, 5 infeasible liability, 6 unbounded program.

mod commands;
mod generate;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{error::ErrorKind, Parser, Subcommand};
use staticarb::lp::dump_problems;
use staticarb::TolerancePolicy;

use commands::{exit, AggregateArgs, LiabilityArgs, MarketArgs, Outcome, SynthArgs};
use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "staticarb",
    version,
    about = "Static arbitrage certification and least-cost super-replication"
)]
struct Cli {
    /// Feasibility tolerance, relative to the data's max-norm.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Margin required for strict positivity of discount factors.
    #[arg(long, global = true, default_value_t = 1e-9)]
    strict_tol: f64,
    /// Write the linear programs set up by the command to this file.
    #[arg(long, global = true)]
    dump_lp: Option<PathBuf>,
    /// Write a run manifest (input digests, tolerances, result) here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a market: arbitrage-free, arbitrage, strict arbitrage or law
    /// of one price failure.
    Check(MarketArgs),
    /// Least-cost super-replication of a liability schedule.
    Superrep(LiabilityArgs),
    /// Ridge hedge of a liability schedule (`superrep --lambda`).
    Hedge(LiabilityArgs),
    /// Roll intermediate cash flows onto liability dates.
    Aggregate(AggregateArgs),
    /// Build the synthetic bond market of a swap–repo universe.
    Synth(SynthArgs),
    #[command(hide = true)]
    Gen(generate::GenArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Superrep(_) => "superrep",
            Command::Hedge(_) => "hedge",
            Command::Aggregate(_) => "aggregate",
            Command::Synth(_) => "synth",
            Command::Gen(_) => "gen",
        }
    }
}

fn dispatch(cli: &Cli, tol: &TolerancePolicy) -> Result<Outcome> {
    match &cli.command {
        Command::Check(a) => commands::check(a, tol),
        Command::Superrep(a) => commands::superrep(a, tol, "superrep"),
        Command::Hedge(a) => {
            anyhow::ensure!(a.lambda.is_some(), "hedge requires --lambda");
            commands::superrep(a, tol, "hedge")
        }
        Command::Aggregate(a) => commands::aggregate(a, tol),
        Command::Synth(a) => commands::synth(a),
        Command::Gen(a) => generate::generate(a),
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let tol = TolerancePolicy::new(cli.tol, cli.strict_tol, TolerancePolicy::default().rank_tol)?;
    let outcome = dispatch(cli, &tol)?;
    if let Some(path) = &cli.dump_lp {
        dump_problems(std::fs::File::create(path)?, &outcome.lps)?;
    }
    println!("{}", serde_json::to_string_pretty(&outcome.report)?);
    if let Some(path) = &cli.manifest {
        let inputs: Vec<&std::path::Path> = outcome.inputs.iter().map(|p| p.as_path()).collect();
        RunManifest::new(
            cli.command.name(),
            &inputs,
            tol,
            outcome.exit,
            outcome.summary(),
        )?
        .write(path)?;
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::INPUT,
            };
            return ExitCode::from(code as u8);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::INPUT as u8)
        }
    }
}
