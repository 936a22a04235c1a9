mod args;
mod commands;
mod output;
mod recipe;
mod source;

use std::process::ExitCode;

use clap::Parser;
use duem_core::Error;

use args::{Cli, Command};
use source::{usage, UsageError};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

fn run(cli: &Cli) -> anyhow::Result<()> {
    let out = cli.out.as_deref();
    if cli.recipe.is_some() && !matches!(cli.command, Command::Optimize(_)) {
        return usage("--recipe applies to optimize only");
    }
    match &cli.command {
        Command::Graph(c) => commands::graph(c, cli.seed, out),
        Command::Spectrum(c) => commands::spectrum(c, cli.seed, out),
        Command::Simulate(c) => commands::simulate_cmd(c, cli.seed, out),
        Command::Mse(c) => commands::mse(c, cli.seed, out),
        Command::Optimize(c) => commands::optimize(c, cli.seed, out, cli.recipe.as_deref()),
        Command::Compare(c) => commands::compare(c, cli.seed, out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::OptimizationFailed { .. } => 3,
            Error::NumericalFailure(_) | Error::DisconnectedGraph { .. } => 4,
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) => 2,
        };
    }
    if err.downcast_ref::<UsageError>().is_some()
        || err.downcast_ref::<serde_json::Error>().is_some()
        || err.downcast_ref::<std::io::Error>().is_some()
    {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
