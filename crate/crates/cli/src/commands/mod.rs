pub mod counterexample;
pub mod diagnose;
pub mod inpaint;
pub mod solve;

use std::path::{Path, PathBuf};

use apgkit::random::{self, RandomSpec};
use apgkit::schedules::{self, Schedule};
use apgkit::{AffineQuadraticProblem, Error};
use clap::Args;
use serde::Serialize;

use crate::CliError;

/// Problem source shared by `solve` and `diagnose`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ProblemSource {
    /// JSON problem descriptor.
    #[arg(long, conflicts_with = "random")]
    pub problem: Option<PathBuf>,
    /// Random dense instance with ambient dimension N and M rows of A.
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    pub random: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ProblemSource {
    pub fn load(&self) -> Result<AffineQuadraticProblem, CliError> {
        match (&self.problem, &self.random) {
            (Some(path), None) => Ok(apgkit::io::load_problem(path)?),
            (None, Some(dims)) => {
                let (n, m) = (dims[0], dims[1]);
                if n == 0 || m == 0 {
                    return Err(Error::Precondition("random dimensions must be positive".into()).into());
                }
                Ok(random::random_problem(RandomSpec::for_dims(n, m), self.seed)?)
            }
            _ => Err(Error::Parse("give exactly one of --problem FILE or --random N M".into()).into()),
        }
    }
}

/// Parses `fista`, `linear-half`, `chambolle-dossal:A`, `theta:T` or `custom:FILE`.
pub fn parse_schedule(spec: &str, base: &Path) -> Result<Schedule, CliError> {
    let num = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| CliError::from(Error::Parse(format!("bad schedule parameter {v:?}"))))
    };
    let s = match spec.split_once(':') {
        None if spec == "fista" => schedules::classical_fista(),
        None if spec == "linear-half" => schedules::linear_half(),
        Some(("chambolle-dossal", a)) => schedules::chambolle_dossal(num(a)?)?,
        Some(("theta", t)) => schedules::theta_family(num(t)?)?,
        Some(("custom", file)) => Schedule::from_csv(&base.join(file))?,
        _ => {
            return Err(Error::Parse(format!(
                "unknown schedule {spec:?} (fista|linear-half|chambolle-dossal:A|theta:T|custom:FILE)"
            ))
            .into())
        }
    };
    Ok(s)
}
