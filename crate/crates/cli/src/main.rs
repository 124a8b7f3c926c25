//! `monbcs`: monitored BCS chain simulations from a TOML config.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! integrity failure. The worker count comes from `MONBCS_WORKERS`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monbcs::{Error, Result};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "monbcs", version, about = "Monitored free-fermion simulator for the 1D BCS chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Override one config key, e.g. `--set gamma=2.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Replace outputs in a directory that already holds a manifest.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble.
    Run(ConfigArgs),
    /// One ensemble per measurement rate.
    SweepGamma {
        #[command(flatten)]
        args: ConfigArgs,
        /// Strictly ascending, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        gammas: Vec<f64>,
    },
    /// One ensemble per chain length; `t_max` and the window scale with L.
    SweepSize {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Asymptotic GGE quantities for a grid of pairing amplitudes.
    Gge {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        deltas: Vec<f64>,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        /// Write gge.csv and a manifest here instead of printing to stdout.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Invariant suite on a small monitored chain.
    Selfcheck,
}

fn load(args: &ConfigArgs) -> Result<RunConfig> {
    RunConfig::load(&args.config, &args.set)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => commands::run(&load(&a)?, a.overwrite),
        Command::SweepGamma { args, gammas } => commands::sweep_gamma(&load(&args)?, &gammas, args.overwrite),
        Command::SweepSize { args, sizes } => commands::sweep_size(&load(&args)?, &sizes, args.overwrite),
        Command::Gge { deltas, j, output_dir, overwrite } => {
            commands::gge_table(j, &deltas, output_dir.as_deref(), overwrite)
        }
        Command::Selfcheck => commands::selfcheck(),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_integrity() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by itself
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
