//! Command implementations behind the `collapse-oracle` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod inputs;
pub mod output;

use std::fs;
use std::io::Write;

use args::{Cli, Command, Format};
use error::{CmdResult, Failure};
use output::Report;

/// Caps the global rayon pool.
pub const THREADS_ENV: &str = "COLLAPSE_ORACLE_THREADS";

/// Applies `COLLAPSE_ORACLE_THREADS` when set; must run before any parallel work.
pub fn configure_threads() -> CmdResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size the thread pool: {e}")))
}

pub fn default_format(command: &Command) -> Format {
    match command {
        Command::Simulate(_) | Command::Lambda(_) => Format::Json,
        _ => Format::Table,
    }
}

pub fn execute(cli: &Cli) -> CmdResult<Report> {
    match &cli.command {
        Command::Rmax(a) => commands::rmax(a),
        Command::Ellipse(a) => commands::ellipse(a),
        Command::Helstrom(a) => commands::helstrom_cmd(a),
        Command::Simulate(a) => commands::simulate(a, cli.seed, cli.timing),
        Command::Lambda(a) => commands::lambda(a, cli.seed, cli.timing),
        Command::Scenario(a) => commands::scenario(a),
    }
}

/// Runs a parsed command line and returns the process exit code.
/// Output is written even when the code is the degenerate-input notice.
pub fn run(cli: &Cli) -> u8 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> CmdResult<u8> {
    let report = execute(cli)?;
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    let text = report.render(format)?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::usage(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(report.status)
}
