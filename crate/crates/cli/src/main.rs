mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run() -> Result<(), CliError> {
    let argv = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            e.print()?;
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            return Err(CliError::parse(
                text.lines()
                    .next()
                    .unwrap_or_default()
                    .trim_start_matches("error: "),
            ));
        }
    };
    init_threads()?;

    let common = &cli.common;
    if !(common.threshold > 0.0 && common.threshold <= 1e-3) {
        return Err(CliError::Domain(format!(
            "--threshold must lie in (0, 1e-3], got {}",
            common.threshold
        )));
    }

    let (bytes, failed) = match &cli.command {
        Command::Single(a) => (
            output::render(&commands::single(a, common.threshold)?, common.format)?,
            0,
        ),
        Command::TwoExec(a) => (output::render(&commands::two_exec(a)?, common.format)?, 0),
        Command::Solve(a) => (
            output::render(&commands::solve(a, common.threshold)?, common.format)?,
            0,
        ),
        Command::Validate(a) => {
            let rows = commands::validate(a, common.threshold, common.seed)?;
            let failed = rows.iter().filter(|r| !r.passed).count();
            (output::render(&rows, common.format)?, failed)
        }
    };
    output::emit(&bytes, common.output.as_deref())?;
    if failed > 0 {
        return Err(CliError::Validation(format!("{failed} check(s) failed")));
    }
    Ok(())
}

/// Sizes the global worker pool from `LEAKWISE_THREADS`, if set.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LEAKWISE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::parse(format!(
            "LEAKWISE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}
