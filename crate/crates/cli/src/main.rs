#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use hbt_core::HbtError;

use crate::args::Cli;
use crate::commands::ToleranceExceeded;

/// Exit codes: 0 success, 1 invalid input or I/O, 2 numerical failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ToleranceExceeded>().is_some() {
        return 2;
    }
    match err.downcast_ref::<HbtError>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
