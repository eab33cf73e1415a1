//! Command-line front end: scenario files, experiment commands and their
//! CSV/JSON outputs.

use std::ffi::OsString;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

/// Caps the number of worker threads.
pub const THREADS_ENV: &str = "CORNER_SINR_THREADS";

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed configuration, unwritable output.
    Usage(anyhow::Error),
    /// A well-formed request the model cannot satisfy.
    Domain(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Domain(e) => e,
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match args::Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli, argv.get(1..).unwrap_or_default()) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            f.exit_code()
        }
    }
}
