//! Command-line front end for `cellscape`: analyze layouts, compare a
//! generated layout against a reference, synthesize layouts, vectorize
//! diagrams and render SVG figures.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod report;
pub mod svg;

pub use args::{Cli, Command};
pub use commands::{cmd_analyze, cmd_compare, cmd_render, cmd_synthesize, cmd_vectorize};

/// Process exit codes. Stable across versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Io = 2,
    Validation = 3,
    Internal = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Validation,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Io,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Internal,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<cellscape::Error> for CliError {
    fn from(e: cellscape::Error) -> Self {
        use cellscape::Error as E;
        let code = match &e {
            E::Io { .. } => ExitCode::Io,
            E::Format { .. } | E::Validation(_) | E::Degenerate(_) | E::Json(_) => {
                ExitCode::Validation
            }
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Parses `argv` and runs the selected subcommand, writing regular output
/// to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    ExitCode::Success as i32
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    ExitCode::Validation as i32
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Synthesize(a) => cmd_synthesize(a, out),
        Command::Vectorize(a) => cmd_vectorize(a, out),
        Command::Render(a) => cmd_render(a, out),
    };
    match result {
        Ok(()) => ExitCode::Success as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code as i32
        }
    }
}
