//! `apgkit`: run PGM/APG on affine-quadratic problems, reproduce the
//! cone/affine counterexample, run DCT inpainting, and print closedness
//! diagnostics.
//!
//! Exit codes: 0 success, 2 configuration or schedule error, 3 counterexample
//! detection failure, 4 oracle cap exceeded, 5 non-convergence. Failures print
//! a one-line JSON error object on stderr.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "apgkit", version, about = "Proximal-gradient and accelerated proximal-gradient toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run PGM or APG on a problem and write the trace.
    Solve(commands::solve::SolveArgs),
    /// Exact cone/affine counterexample.
    Counterexample(commands::counterexample::CounterexampleArgs),
    /// DCT-constrained inpainting from several initializations.
    Inpaint(commands::inpaint::InpaintArgs),
    /// Friedrichs cosine, error-bound constant and solution-set data.
    Diagnose(commands::diagnose::DiagnoseArgs),
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DETECTION: u8 = 3;
pub const EXIT_ORACLE_CAP: u8 = 4;
pub const EXIT_NO_CONVERGENCE: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Lib(apgkit::Error),
    /// A run finished but did not meet its tolerance; outputs were written.
    NotConverged(String),
    /// Counterexample values differ from the expected ones.
    Golden(String),
}

impl From<apgkit::Error> for CliError {
    fn from(e: apgkit::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        use apgkit::Error as E;
        match self {
            CliError::NotConverged(_) => "not-converged",
            CliError::Golden(_) => "golden-mismatch",
            CliError::Lib(e) => match e {
                E::Dimension { .. } => "dimension",
                E::InvalidOperator(_) => "invalid-operator",
                E::InvalidSubspace(_) => "invalid-subspace",
                E::NoConvergence { .. } => "no-convergence",
                E::OracleCap { .. } => "oracle-cap",
                E::Schedule(_) => "schedule",
                E::Precondition(_) => "precondition",
                E::CertificationUnavailable(_) => "certification-unavailable",
                E::LipTooSmall { .. } => "lip-too-small",
                E::LinearAlgebra(_) => "linear-algebra",
                E::Undetected { .. } => "undetected",
                E::Parse(_) => "parse",
                E::Io(_) => "io",
                E::Json(_) => "json",
                E::Csv(_) => "csv",
                E::Image(_) => "image",
            },
        }
    }

    fn exit_code(&self) -> u8 {
        use apgkit::Error as E;
        match self {
            CliError::NotConverged(_) => EXIT_NO_CONVERGENCE,
            CliError::Golden(_) => EXIT_DETECTION,
            CliError::Lib(e) => match e {
                E::Undetected { .. } => EXIT_DETECTION,
                E::OracleCap { .. } | E::CertificationUnavailable(_) => EXIT_ORACLE_CAP,
                E::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
                E::LinearAlgebra(_) => 1,
                _ => EXIT_CONFIG,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(apgkit::Error::Undetected { horizon }) => {
                format!("no limit detected within horizon {horizon}; rerun with a larger --horizon")
            }
            CliError::Lib(e) => e.to_string(),
            CliError::NotConverged(m) | CliError::Golden(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve::run(a),
        Command::Counterexample(a) => commands::counterexample::run(a),
        Command::Inpaint(a) => commands::inpaint::run(a),
        Command::Diagnose(a) => commands::diagnose::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let obj = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.message(), "exit_code": code }
            });
            eprintln!("{obj}");
            ExitCode::from(code)
        }
    }
}
