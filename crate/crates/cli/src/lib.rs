//! Command-line front end: configuration, structured reports, CSV field
//! dumps and the end-to-end reproduction runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod field;
pub mod repro;
pub mod report;

pub use args::{Cli, Command};
pub use commands::Outcome;
pub use config::RunConfig;
pub use error::{CliError, EXIT_FAILED, EXIT_INVALID, EXIT_OK};
pub use report::{Claim, ClaimValue, Report, ReproReport};

/// Run a parsed command line.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let cfg = command.args().resolve()?;
    match command {
        Command::Classify(_) => commands::classify(&cfg),
        Command::Solve(_) => commands::solve(&cfg),
        Command::Eigen(_) => commands::eigen(&cfg),
        Command::BarrierCheck(_) => commands::barrier_check(&cfg),
        Command::FitExponent(_) => commands::fit_exponent(&cfg),
        Command::ScanThreshold(_) => commands::scan_threshold(&cfg),
        Command::LemmaIntegral(_) => commands::lemma_integral(&cfg),
        Command::ReproduceTheorem1(_) => commands::reproduce_theorem1(&cfg),
    }
}
