//! Command-line front end for `breakcurve-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod refdata;

pub use args::{Cli, Command};
pub use commands::Outcome;
pub use error::{CliError, CliResult};

/// Runs one parsed command.
pub fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Correlate(a) => commands::cmd_correlate(a),
        Command::Predict(a) => commands::cmd_predict(a),
        Command::Sensitivity(a) => commands::cmd_sensitivity(a),
        Command::Report(a) => commands::cmd_report(a),
    }
}
