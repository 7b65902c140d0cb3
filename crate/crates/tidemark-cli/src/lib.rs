//! Command-line frontend for the watermarking toolkit.
//!
//! The `tidemark` binary exposes the library's analytic and simulation
//! surfaces as batch commands: exponent curves sampled to CSV/JSON, seeded
//! Monte Carlo runs, one-shot embed/detect on plain-text vector files, a
//! threshold sweep that fits empirical exponents, and a small-`n`
//! enumeration demo of the worst-case attack channel.
//!
//! Every command is a pure function of its flags, input files, and seed:
//! repeating an invocation produces byte-identical output. Exit codes are
//! part of the contract — 0 on success, 2 for usage errors, 3 for domain or
//! data failures, 4 when a request exceeds an exact-enumeration cap.

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

pub mod args;
pub mod demo;
pub mod output;
pub mod run;
pub mod vectors;

/// Everything that can go wrong after argument parsing.
///
/// Usage errors never reach this type: clap reports them and exits with
/// code 2 on its own.
#[derive(Debug)]
pub enum CliError {
    /// A library precondition failed (domain violations, caps, infeasible
    /// budgets, refused fits).
    Lib(tidemark::Error),
    /// A file could not be read, written, or parsed; the message names the
    /// offending path and line.
    Data(String),
}

impl CliError {
    /// Process exit code for this failure: 4 for enumeration-cap overruns,
    /// 3 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(tidemark::Error::CapExceeded { .. }) => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl From<tidemark::Error> for CliError {
    fn from(e: tidemark::Error) -> Self {
        CliError::Lib(e)
    }
}

/// Parses the command line, runs the selected command, and maps failures to
/// the documented exit codes.
pub fn main_entry() -> ExitCode {
    let cli = args::Cli::parse();
    match run::dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
