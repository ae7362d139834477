use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use apgkit::io::{self, DenseData};
use apgkit::solvers::{self, Certificate, RunConfig, SnapshotPolicy, StopReason};
use apgkit::{random, vector, CertifyFlags, Error, StopRule};
use clap::Args;
use serde::Serialize;

use super::{parse_schedule, ProblemSource};
use crate::output::{self, OutDir};
use crate::CliError;

/// Mixed into the seed for the default starting point.
const X0_SALT: u64 = 0x5eed_0001;

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// fista | linear-half | chambolle-dossal:A | theta:T | custom:FILE
    #[arg(long, default_value = "fista")]
    pub schedule: String,
    /// Run PGM instead of APG.
    #[arg(long)]
    pub pgm: bool,
    /// Stop once ‖G(x_k)‖ ≤ TOL.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = solvers::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Comma list of xi, ball, rate, shadow, dist; or all / none.
    #[arg(long, default_value = "none")]
    pub certify: String,
    /// Starting point file (CSV or binary vector); default is seeded Gaussian.
    #[arg(long)]
    pub x0: Option<PathBuf>,
    /// Run schedules that satisfy neither admissibility condition.
    #[arg(long)]
    pub allow_inadmissible: bool,
    /// Also write binary snapshots of the stored iterates.
    #[arg(long)]
    pub snapshots: bool,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

fn parse_certify(s: &str) -> Result<CertifyFlags, CliError> {
    let mut f = CertifyFlags::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "all" => f = CertifyFlags::all(),
            "none" => {}
            "xi" => f.xi = true,
            "ball" => f.ball = true,
            "rate" => f.rate = true,
            "shadow" => f.shadow = true,
            "dist" => f.dist = true,
            _ => return Err(Error::Parse(format!("unknown certificate {part:?}")).into()),
        }
    }
    Ok(f)
}

#[derive(Serialize)]
struct ViolationCounts {
    hard: usize,
    informational: usize,
}

#[derive(Serialize)]
struct ShadowSummary {
    max_par_s_ratio: f64,
    max_projection_gap: f64,
    max_excess_over_bound: f64,
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    m: usize,
    lip: f64,
    algorithm: solvers::Algorithm,
    schedule: Option<String>,
    stop: StopReason,
    iterations: usize,
    converged: bool,
    gradmap_final: f64,
    f_final: f64,
    gap_final: Option<f64>,
    dist_s_final: Option<f64>,
    /// `‖x_final − P_S x₀‖`.
    dist_to_ps_x0: Option<f64>,
    violations: BTreeMap<String, ViolationCounts>,
    unavailable: Vec<String>,
    admissibility: Option<apgkit::schedules::Admissibility>,
    shadow: Option<ShadowSummary>,
}

pub fn run(args: SolveArgs) -> Result<(), CliError> {
    let p = args.source.load()?;
    let flags = parse_certify(&args.certify)?;
    let x0 = match &args.x0 {
        Some(path) => io::read_vector(path)?,
        None => random::gaussian_vec(&mut random::rng(args.source.seed ^ X0_SALT), p.dim()),
    };
    let stop = StopRule {
        max_iter: args.max_iter,
        gradmap_tol: args.tol,
        gap_tol: None,
    };
    let cfg = RunConfig {
        stop,
        certify: flags,
        snapshots: SnapshotPolicy::default(),
        allow_inadmissible: args.allow_inadmissible,
    };
    let trace = if args.pgm {
        solvers::run_pgm(&p, &x0, &cfg)?
    } else {
        let schedule = parse_schedule(&args.schedule, Path::new(""))?;
        solvers::run_apg(&p, &x0, &schedule, &cfg)?
    };

    let header = output::header(&args, Some(args.source.seed));
    let out = OutDir::create(&args.out)?;
    {
        let mut w = out.writer("trace.csv")?;
        w.write_all(header.comment_lines("#").as_bytes()).map_err(Error::from)?;
        trace.write_csv(&mut w)?;
        w.flush().map_err(Error::from)?;
    }
    let fin = DenseData {
        rows: trace.x_final.len(),
        cols: 1,
        data: trace.x_final.clone(),
    };
    io::write_matrix_bin(out.writer("final.bin")?, &fin)?;
    if args.snapshots {
        io::write_snapshots(out.writer("snapshots.bin")?, &trace.snapshots)?;
    }

    let mut violations = BTreeMap::new();
    for c in [
        Certificate::Rate,
        Certificate::XiMonotone,
        Certificate::XiInitial,
        Certificate::BallX,
        Certificate::BallZ,
    ] {
        let of = |info: bool| {
            trace
                .violations
                .iter()
                .filter(|v| v.certificate == c && v.informational == info)
                .count()
        };
        let name = serde_json::to_value(c).expect("serializes").as_str().unwrap_or_default().to_string();
        violations.insert(
            name,
            ViolationCounts {
                hard: of(false),
                informational: of(true),
            },
        );
    }
    let shadow = (!trace.shadow.is_empty()).then(|| ShadowSummary {
        max_par_s_ratio: trace.shadow.iter().map(|r| r.par_s_norm / (1.0 + r.s_norm)).fold(0.0, f64::max),
        max_projection_gap: trace.shadow.iter().map(|r| r.projection_gap).fold(0.0, f64::max),
        max_excess_over_bound: trace.shadow.iter().map(|r| r.s_norm - r.bound).fold(f64::NEG_INFINITY, f64::max),
    });
    let dist_to_ps_x0 = p
        .cached_solution_set()
        .map(|s| vector::dist(&trace.x_final, &s.project(&x0)));
    let last = trace.last();
    let converged = args.tol.is_none() || trace.stop == StopReason::GradientMapping;
    let summary = Summary {
        n: p.dim(),
        m: p.a().rows(),
        lip: p.lip(),
        algorithm: trace.algorithm,
        schedule: trace.schedule.clone(),
        stop: trace.stop,
        iterations: trace.iterations,
        converged,
        gradmap_final: last.gradmap,
        f_final: last.f,
        gap_final: last.gap,
        dist_s_final: last.dist_s,
        dist_to_ps_x0,
        violations,
        unavailable: trace.unavailable.clone(),
        admissibility: trace.admissibility.clone(),
        shadow,
    };
    out.json("summary.json", &header, &summary)?;
    if !converged {
        return Err(CliError::NotConverged(format!(
            "‖G(x_k)‖ = {} above tolerance after {} iterations (stop: {:?})",
            last.gradmap, trace.iterations, trace.stop
        )));
    }
    Ok(())
}
