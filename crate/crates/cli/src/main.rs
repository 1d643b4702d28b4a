//! `aclr`: build, evolve and analyze locally reviving states of spin chains.
//!
//! Every subcommand writes plain data files (CSV series, JSON manifests) into
//! `--out`. Exit codes: 0 on success, 1 on a computation error, 2 on a usage
//! error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(usize::from(workers))
            .build_global()
        {
            eprintln!("error: cannot start {workers} workers: {e}");
            return ExitCode::from(1);
        }
    }

    let result = match &cli.command {
        Command::Thermal(a) => commands::thermal(a),
        Command::Revive(a) => commands::revive(a),
        Command::Superpose(a) => commands::superpose(a),
        Command::HigherSpin(a) => commands::higher_spin(a),
        Command::Dymarsky(a) => commands::dymarsky(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Spectra(a) => commands::spectra(a),
        Command::Keygen(a) => commands::keygen(a),
        Command::Encode(a) => commands::encode(a),
        Command::Decode(a) => commands::decode(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
