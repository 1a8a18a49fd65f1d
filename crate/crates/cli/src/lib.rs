//! Batch front end for `pardiff-core`.
//!
//! [`run`] parses a command line, dispatches to the library and maps failures
//! to exit codes: 0 on success, 1 for input or parse errors, 2 for numerical
//! failure. Results go to files or standard output, diagnostics to standard
//! error.

pub mod args;
mod commands;
pub mod error;
mod io;
pub mod study;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command, Problem};
pub use error::{CliError, CliResult};
pub use study::{convergence_study, study_csv, ObservedOrder, StudyProblem, StudyRow};

/// Runs one command and returns its text for standard output.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let mut stdout = String::new();
    match &cli.command {
        Command::Classify(a) => commands::classify(a, &mut stdout)?,
        Command::Apply(a) => commands::apply(a)?,
        Command::Solve(a) => commands::solve(a, &mut stdout)?,
        Command::Mollify(a) => commands::mollify(a, &mut stdout)?,
        Command::Potential(a) => commands::potential(a)?,
        Command::Verify(v) => commands::verify(v, &mut stdout)?,
        Command::Convergence(a) => commands::convergence(a, &mut stdout)?,
    }
    Ok(stdout)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
