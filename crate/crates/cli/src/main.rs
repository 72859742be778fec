mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("{}", output::diagnostic("config", &msg));
            ExitCode::from(2)
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("{}", output::diagnostic("compute", &msg));
            ExitCode::from(1)
        }
    }
}
