use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    slidecorr_cli::run(slidecorr_cli::args::Cli::parse())
}
