//! `jacobi-lab`: runs toolkit experiments and persists their reports.
//!
//! Exit status: 0 when a run passes or is exploratory, 1 when a check
//! fails, 2 on usage or config errors, 3 on numerical failures.

mod commands;
mod config;
mod error;
mod output;

use clap::Parser;
use std::process::ExitCode;

use commands::{Cli, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(Outcome { pass: Some(false), .. }) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
