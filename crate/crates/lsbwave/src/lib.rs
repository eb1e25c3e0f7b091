//! Command-line front end for `lsbwave-core`: JSON configs in, CSV out.
//!
//! ```text
//! lsbwave scatter --config lattice.json --energies 0.5:2:151 --out t.csv
//! lsbwave bound --config well.json --energies -1:0:400 --bc decaying
//! ```
//!
//! Exit codes: 0 on success, 1 for bad input (flags, config, symmetry
//! violations, closed channels, ...), 2 when a numerical stage fails.

mod cli;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};

use clap::Parser;
use lsbwave_core::Error;

pub use config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, config or physical setup; exit code 1.
    Input(String),
    /// A numerical stage failed; exit code 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub(crate) fn context(self, ctx: impl fmt::Display) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{ctx}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{ctx}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidSpec(_)
            | Error::SymmetryViolation { .. }
            | Error::NoTransform
            | Error::OutOfRange { .. }
            | Error::CellIndex { .. }
            | Error::DomainIndex { .. }
            | Error::ClosedChannel { .. }
            | Error::NoSymmetryMapping { .. }
            | Error::NotBijective { .. } => CliError::Input(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

/// Parses `args` (program name first) and runs the command on stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match commands::execute(parsed.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "lsbwave: {e}");
            e.exit_code()
        }
    }
}
