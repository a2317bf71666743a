//! Command-line surface over the `hybrid-mean` library.
//!
//! Exit codes: 0 on success, 2 for invalid parameters, 3 for I/O failures,
//! and 4 when `simulate` finds a Monte Carlo estimate more than three
//! standard errors from its closed form.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybrid_mean::{Error, Result};

use crate::config::FileConfig;

#[derive(Parser)]
#[command(
    name = "hybrid-mean",
    version,
    about = "Mean estimation and clustering under a hybrid differential-privacy trust model"
)]
struct Cli {
    /// Flat key=value config file; explicit flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for the parallel layers (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form error analysis of a single setting
    Analyze(commands::analyze::AnalyzeArgs),
    /// Closed-form improvement and skew sweeps, written as CSV
    Sweep(commands::sweep::SweepArgs),
    /// Monte Carlo validation of the closed-form errors
    Simulate(commands::simulate::SimulateArgs),
    /// Privacy guarantees against coalitions that see the released mean
    Amplify(commands::amplify::AmplifyArgs),
    /// Private K-means benchmark on synthetic clustered data
    Kmeans(commands::kmeans::KmeansArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invalid(_) => ExitCode::from(2),
                Error::Io(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let threads = config::resolve_opt(cli.threads, &cfg, "threads")?;
    let command = cli.command;
    let body = move || dispatch(command, &cfg);
    match threads {
        Some(t) => {
            if t == 0 {
                return Err(Error::invalid("threads must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
                .install(body)
        }
        None => body(),
    }
}

fn dispatch(command: Command, cfg: &FileConfig) -> Result<ExitCode> {
    match command {
        Command::Analyze(args) => commands::analyze::run(args, cfg),
        Command::Sweep(args) => commands::sweep::run(args, cfg),
        Command::Simulate(args) => commands::simulate::run(args, cfg),
        Command::Amplify(args) => commands::amplify::run(args, cfg),
        Command::Kmeans(args) => commands::kmeans::run(args, cfg),
    }
}
