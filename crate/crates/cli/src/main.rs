use std::process::ExitCode;

use clap::Parser;
use collapse_oracle::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = collapse_oracle::configure_threads() {
        eprintln!("{f}");
        return ExitCode::from(f.exit_code());
    }
    ExitCode::from(collapse_oracle::run(&cli))
}
