//! `pcmkit` command-line front end.
//!
//! Exit status: 0 success or accepted, 1 usage error, 2 data error,
//! 3 matrix rejected by `accept`.

mod commands;
mod config;
mod render;

use std::process::ExitCode;

use clap::Parser;
use pcmkit::Error;

use crate::commands::Outcome;
use crate::config::Command;

#[derive(Debug, Parser)]
#[command(name = "pcmkit", version, about = "Pairwise comparison matrices: indices, simulations, acceptance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::ErrorModel(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Rejected) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
