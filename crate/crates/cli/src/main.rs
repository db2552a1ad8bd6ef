//! `vgx`: reproducible experiments on extremes of vector Gaussian processes.
//!
//! Exit codes: 0 success, 1 usage error or failed verification, 2 numerical
//! non-convergence or no events to report.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Non-convergence, or a run with nothing to report.
    Numerical(String),
    /// `verify` found failing criteria.
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Failed(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<vgx_core::Error> for CliError {
    fn from(e: vgx_core::Error) -> Self {
        use vgx_core::Error::*;
        match e {
            NonConvergence { .. } | Quadrature(_) | Embedding { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("usage error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Constant(a) => commands::constant(a),
        Command::Ruin(a) => commands::ruin(a),
        Command::RuinTime(a) => commands::ruin_time(a),
        Command::Verify(a) => commands::verify(a),
        Command::Paths(a) => commands::paths(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
