use std::process::ExitCode;

use clap::Parser;
use fjnet::cli::{run, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(config) => match run(&config) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => {
                eprintln!("fjnet: verification failed");
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("fjnet: {e}");
                ExitCode::from(2)
            }
        },
    }
}
