use std::process::ExitCode;

use clap::Parser;
use hrpfolio::cli;

fn main() -> ExitCode {
    let parsed = cli::Cli::parse();
    let code = cli::run(parsed, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
