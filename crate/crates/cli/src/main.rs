//! `moran`: command-line front end.
//!
//! Exit codes: 0 success, 1 invalid arguments or parameters, 2 runtime
//! failure, 3 selftest failure. If `MORAN_OUT_DIR` is set, relative output
//! paths are resolved against it.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Validation(String),
    Runtime(String),
    Selftest,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Selftest => 3,
        }
    }
}

impl From<moran_core::Error> for CliError {
    fn from(e: moran_core::Error) -> Self {
        match e {
            moran_core::Error::InvalidParameter { .. } => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let result = config::parse(std::env::args_os()).and_then(commands::run);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(err) => {
                    let _ = err.print();
                }
                CliError::Validation(msg) => eprintln!("error: {msg}"),
                CliError::Runtime(msg) => eprintln!("error: {msg}"),
                CliError::Selftest => eprintln!("selftest failed"),
            }
            ExitCode::from(e.code())
        }
    }
}
