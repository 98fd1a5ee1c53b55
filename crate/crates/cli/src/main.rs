use std::process::ExitCode;

use clap::Parser;
use mlap_cli::{execute, Cli, EXIT_FAILED, EXIT_OK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::from(if outcome.passed { EXIT_OK } else { EXIT_FAILED })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
