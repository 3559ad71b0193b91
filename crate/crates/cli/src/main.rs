//! `entroute`: line-network analytics, rate estimation and grid routing
//! benchmarks, written as CSV.

mod commands;
mod config;
mod output;

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Failure;
use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "entroute", version, about = "Opportunistic entanglement routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form line statistics and Monte-Carlo waiting-time spectra
    Analyze(Args),
    /// Transmission-rate curves or per-trial trajectories
    Rate(Args),
    /// Benchmark one scenario (OPP vs NOPP for each algorithm)
    Simulate(Args),
    /// Benchmark a scenario along one swept parameter
    Sweep(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// TOML experiment config
    #[arg(long)]
    config: PathBuf,
    /// Master seed
    #[arg(long)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores); output does not depend on it
    #[arg(long)]
    jobs: Option<NonZeroUsize>,
    /// Override a config value, e.g. `--set scenario.p_gen=0.3`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(command: &Command) -> Result<(), Failure> {
    let (Command::Analyze(args) | Command::Rate(args) | Command::Simulate(args) | Command::Sweep(args)) = command;
    let config = Config::load(&args.config, &args.set)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs.get());
    }
    let pool = pool.build().map_err(|e| std::io::Error::other(e.to_string()))?;
    pool.install(|| match command {
        Command::Analyze(_) => commands::analyze(&config, args.seed, &args.out),
        Command::Rate(_) => commands::rate(&config, args.seed, &args.out),
        Command::Simulate(_) => commands::simulate(&config, args.seed, &args.out),
        Command::Sweep(_) => commands::sweep_cmd(&config, args.seed, &args.out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entroute: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
