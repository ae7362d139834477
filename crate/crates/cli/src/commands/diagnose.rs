use apgkit::problem::{certify_error_bound, closedness_diagnostics, ErrorBoundCertificate};
use apgkit::{vector, Diagnostics};
use clap::Args;
use serde::Serialize;

use super::ProblemSource;
use crate::output;
use crate::CliError;

#[derive(Debug, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Random points of par U used to check the error bound.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    diagnostics: Diagnostics,
    lip: f64,
    /// `dist(x̄, U)`-type residual of the anchor.
    anchor_u_residual: f64,
    /// `‖P_{par U}∇f(x̄)‖`, zero at a minimizer.
    anchor_optimality_residual: f64,
    error_bound: ErrorBoundCertificate,
}

pub fn run(args: DiagnoseArgs) -> Result<(), CliError> {
    let p = args.source.load()?;
    let diagnostics = closedness_diagnostics(&p)?;
    let s = p.solution_set()?;
    let anchor = s.anchor();
    let report = Report {
        lip: p.lip(),
        anchor_u_residual: p.u().residual(anchor)?,
        anchor_optimality_residual: vector::norm(&p.u().project_parallel(&p.gradient(anchor)?)?),
        error_bound: certify_error_bound(&p, diagnostics.error_bound_c, args.samples, args.source.seed, 1e-8)?,
        diagnostics,
    };
    let header = output::header(&args, Some(args.source.seed));
    print!("{}", output::json_document(&header, &report));
    Ok(())
}
