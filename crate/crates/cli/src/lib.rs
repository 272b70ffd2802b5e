//! Command-line driver for `slidecorr`: correlate grid files, check the
//! optimized backends against the brute-force reference, time them, and
//! generate synthetic inputs.

pub mod args;
pub mod bench;
pub mod commands;
pub mod synth;

use std::process::ExitCode;

use args::{Cli, Command};
use commands::CliError;

/// Runs one parsed command line and maps the outcome to an exit status.
pub fn run(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Correlate(a) => commands::cmd_correlate(a),
        Command::Compare(a) => commands::cmd_compare(a).and_then(|pass| {
            if pass {
                Ok(())
            } else {
                Err(CliError::Failed("comparison failed".into()))
            }
        }),
        Command::Bench(a) => commands::cmd_bench(a),
        Command::Gen(a) => commands::cmd_gen(a),
    };
    commands::flush_stdout();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slidecorr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
