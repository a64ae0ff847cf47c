//! `cvdyn`: trajectories, sweeps, coefficient dumps and figure datasets.
//!
//! Exit status: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.

mod config;
mod output;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{parse_config, Cli};
use run::{run, Failure};

const USAGE: u8 = 1;
const NUMERICAL: u8 = 2;
const IO: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    let file = match &cli.config {
        None => None,
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", p.display());
                return ExitCode::from(IO);
            }
        },
    };
    let cfg = match parse_config(&cli, file.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration");
            for m in &e.0 {
                eprintln!("  {m}");
            }
            return ExitCode::from(USAGE);
        }
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(&cfg) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e @ Failure::Numerical(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(NUMERICAL)
        }
        Err(e @ Failure::Io(..)) => {
            eprintln!("error: {e}");
            ExitCode::from(IO)
        }
    }
}
