//! Proximal gradient (PGM) and accelerated proximal gradient (APG) runs with
//! per-iteration certificates, plus the generic inertial iteration both are
//! built on.

mod inertial;
mod trace;

use std::sync::Arc;

pub use inertial::{inertial_trajectory, FixedPointMap, InertialState};
pub use trace::{
    Algorithm, CertViolation, Certificate, ShadowRecord, SnapshotPolicy, SolverTrace, StopReason, TraceRow,
    CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::problem::{AffineQuadraticProblem, SolutionSet};
use crate::schedules::{ParameterSequence, Schedule, VALIDATION_HORIZON};
use crate::vector;

/// Default cap on iterations.
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Default relative slack of certificate checks.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// Membership tolerance used when evaluating `F = f + ι_U`.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StopRule {
    pub max_iter: usize,
    /// Stop once `‖G(x_k)‖ ≤ gradmap_tol`.
    pub gradmap_tol: Option<f64>,
    /// Stop once `F(x_k) − μ ≤ gap_tol`; needs the oracle.
    pub gap_tol: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_iter: DEFAULT_MAX_ITER,
            gradmap_tol: None,
            gap_tol: None,
        }
    }
}

impl StopRule {
    pub fn iterations(n: usize) -> Self {
        StopRule {
            max_iter: n,
            ..Self::default()
        }
    }

    pub fn gradmap(tol: f64, max_iter: usize) -> Self {
        StopRule {
            max_iter,
            gradmap_tol: Some(tol),
            gap_tol: None,
        }
    }
}

/// Certificates checked during a run. All of them need the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CertifyFlags {
    pub xi: bool,
    pub ball: bool,
    pub rate: bool,
    pub shadow: bool,
    /// Record `F − μ` and `dist(x_k, S)` without checking anything.
    pub dist: bool,
    pub slack: f64,
}

impl Default for CertifyFlags {
    fn default() -> Self {
        CertifyFlags {
            xi: false,
            ball: false,
            rate: false,
            shadow: false,
            dist: false,
            slack: DEFAULT_SLACK,
        }
    }
}

impl CertifyFlags {
    pub fn all() -> Self {
        CertifyFlags {
            xi: true,
            ball: true,
            rate: true,
            shadow: true,
            dist: true,
            slack: DEFAULT_SLACK,
        }
    }

    fn needs_oracle(&self) -> bool {
        self.xi || self.ball || self.rate || self.shadow || self.dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub stop: StopRule,
    pub certify: CertifyFlags,
    pub snapshots: SnapshotPolicy,
    /// Run schedules that satisfy neither admissibility condition.
    pub allow_inadmissible: bool,
}

impl RunConfig {
    pub fn new(stop: StopRule, certify: CertifyFlags) -> Self {
        RunConfig {
            stop,
            certify,
            ..Self::default()
        }
    }
}

/// `G(x) = x − P_U(x − (1/lip)∇f(x))`.
pub fn gradient_mapping(p: &AffineQuadraticProblem, x: &[f64]) -> Result<Vec<f64>> {
    let g = p.gradient(x)?;
    let step: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gi / p.lip()).collect();
    Ok(vector::sub(x, &p.u().project(&step)?))
}

/// Shadow decomposition of an iterate against the PGM iterate `T^k x_0`.
pub fn shadow_decomposition(s: &SolutionSet, iter: usize, x_k: &[f64], tk_x0: &[f64]) -> ShadowRecord {
    let sk = vector::sub(x_k, tk_x0);
    ShadowRecord {
        iter,
        s_norm: vector::norm(&sk),
        par_s_norm: vector::norm(&s.project_parallel(&sk)),
        projection_gap: vector::dist(&s.project(x_k), &s.project(tk_x0)),
        bound: s.dist(x_k) + s.dist(tk_x0),
    }
}

/// Proximal gradient method `x_{k+1} = T x_k`.
pub fn run_pgm(p: &AffineQuadraticProblem, x0: &[f64], cfg: &RunConfig) -> Result<SolverTrace> {
    Runner::new(p, x0, cfg, None)?.run()
}

/// Accelerated proximal gradient with momentum from `schedule`.
///
/// A schedule satisfying neither admissibility condition is rejected unless
/// `cfg.allow_inadmissible` is set. Certificate failures under a schedule
/// outside the FISTA conditions are recorded as informational.
pub fn run_apg(p: &AffineQuadraticProblem, x0: &[f64], schedule: &Schedule, cfg: &RunConfig) -> Result<SolverTrace> {
    Runner::new(p, x0, cfg, Some(schedule))?.run()
}

struct Oracle {
    set: Arc<SolutionSet>,
    x_star: Vec<f64>,
    /// `‖x_0 − x*‖`.
    radius: f64,
}

struct Runner<'a> {
    p: &'a AffineQuadraticProblem,
    x0: &'a [f64],
    cfg: &'a RunConfig,
    schedule: Option<&'a Schedule>,
    seq: Option<ParameterSequence>,
    oracle: Option<Oracle>,
    trace: SolverTrace,
    informational: bool,
}

impl<'a> Runner<'a> {
    fn new(p: &'a AffineQuadraticProblem, x0: &'a [f64], cfg: &'a RunConfig, schedule: Option<&'a Schedule>) -> Result<Self> {
        if x0.len() != p.dim() {
            return Err(Error::dim("initial point", p.dim(), x0.len()));
        }
        let mut admissibility = None;
        let mut informational = false;
        if let Some(s) = schedule {
            let horizon = cfg.stop.max_iter.saturating_add(2).min(VALIDATION_HORIZON);
            let adm = s.admissibility(horizon);
            if !adm.is_admissible() && !cfg.allow_inadmissible {
                return Err(Error::Schedule(format!(
                    "schedule {s} satisfies neither admissibility condition ({adm:?})"
                )));
            }
            informational = !adm.satisfies_fista_conditions();
            admissibility = Some(adm);
        }
        let mut unavailable = Vec::new();
        let oracle = if cfg.certify.needs_oracle() || cfg.stop.gap_tol.is_some() {
            match p.solution_set() {
                Ok(set) => {
                    let x_star = set.project(x0);
                    let radius = vector::dist(x0, &x_star);
                    Some(Oracle {
                        set,
                        x_star,
                        radius,
                    })
                }
                Err(e @ (Error::OracleCap { .. } | Error::LinearAlgebra(_))) => {
                    unavailable.push(Error::CertificationUnavailable(e.to_string()).to_string());
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let trace = SolverTrace {
            algorithm: if schedule.is_some() { Algorithm::Apg } else { Algorithm::Pgm },
            schedule: schedule.map(|s| s.to_string()),
            lip: p.lip(),
            rows: Vec::new(),
            snapshots: Default::default(),
            x_final: Vec::new(),
            iterations: 0,
            stop: StopReason::MaxIter,
            violations: Vec::new(),
            unavailable,
            admissibility,
            shadow: Vec::new(),
        };
        Ok(Runner {
            p,
            x0,
            cfg,
            schedule,
            seq: schedule.map(|s| s.sequence()),
            oracle,
            trace,
            informational,
        })
    }

    /// `F(x) − μ`, evaluated for `x ∈ U` through the energy identity
    /// `F(x) − μ = ½‖A(x − x̄)‖²`, which has no cancellation near `S`.
    fn gap(&self, o: &Oracle, x: &[f64], feasible: bool) -> Result<f64> {
        if !feasible {
            return Ok(f64::INFINITY);
        }
        let ad = self.p.a().apply(&vector::sub(x, o.set.anchor()))?;
        Ok(0.5 * vector::norm_sq(&ad))
    }

    /// Records a violation when `lhs > rhs + slack·max(|rhs|, scale)`.
    fn check(&mut self, iter: usize, certificate: Certificate, lhs: f64, rhs: f64, scale: f64) {
        if lhs > rhs + self.cfg.certify.slack * rhs.abs().max(scale) {
            self.trace.violations.push(CertViolation {
                iter,
                certificate,
                lhs,
                rhs,
                informational: self.informational,
            });
        }
    }

    /// Records row `k` for state `(x_k, r_k)`; `t_prev = t_{k−1}`, `t_k`.
    fn record(&mut self, k: usize, x: &[f64], r: &[f64], t_prev: Option<f64>, t_k: Option<f64>) -> Result<()> {
        let p = self.p;
        let feasible = p.u().contains(x, FEASIBILITY_TOL)?;
        let f = if feasible { p.f(x)? } else { f64::INFINITY };
        let tx = p.operator().value(x)?;
        let gradmap = vector::dist(x, &tx);
        let mut row = TraceRow {
            iter: k,
            f,
            gap: None,
            xi: None,
            dist_s: None,
            gradmap,
            bound_rate: None,
            bound_xi: None,
            bound_ball: None,
            dist_x_star: None,
            dist_z_star: None,
        };
        if let Some(o) = &self.oracle {
            let gap = self.gap(o, x, feasible)?;
            let lip = p.lip();
            let r2 = o.radius * o.radius;
            row.gap = Some(gap);
            row.dist_s = Some(o.set.dist(x));
            row.bound_ball = Some(o.radius);
            row.dist_x_star = Some(vector::dist(x, &o.x_star));
            row.bound_xi = Some(0.5 * lip * r2);
            if k >= 1 {
                row.bound_rate = Some(match self.schedule {
                    Some(_) => 2.0 * lip * r2 / ((k + 1) as f64).powi(2),
                    None => lip * r2 / (2.0 * k as f64),
                });
                if let (Some(tp), Some(tk)) = (t_prev, t_k) {
                    let mut z = x.to_vec();
                    vector::axpy(tk, r, &mut z);
                    let dz = vector::dist(&z, &o.x_star);
                    row.dist_z_star = Some(dz);
                    row.xi = Some(tp * tp * gap + 0.5 * lip * dz * dz);
                }
            }
        }
        self.certify(&row);
        self.trace.rows.push(row);
        if self.cfg.snapshots.keeps(k) {
            self.trace.snapshots.insert(k, x.to_vec());
        }
        Ok(())
    }

    fn certify(&mut self, row: &TraceRow) {
        let c = self.cfg.certify;
        let k = row.iter;
        if k == 0 {
            return;
        }
        if c.rate {
            if let (Some(gap), Some(b)) = (row.gap, row.bound_rate) {
                self.check(k, Certificate::Rate, gap, b, 0.0);
            }
        }
        if c.xi {
            if let Some(xi) = row.xi {
                if k == 1 {
                    if let Some(b) = row.bound_xi {
                        self.check(k, Certificate::XiInitial, xi, b, 0.0);
                    }
                } else if let Some(prev) = self.trace.rows.last().and_then(|r| r.xi) {
                    // Once ξ_k has settled at the rounding floor its relative
                    // changes are noise; the slack is taken against the
                    // energy scale (lip/2)‖x₀ − x*‖² instead.
                    self.check(k, Certificate::XiMonotone, xi, prev, row.bound_xi.unwrap_or(0.0));
                }
            }
        }
        if c.ball {
            if let (Some(d), Some(b)) = (row.dist_x_star, row.bound_ball) {
                self.check(k, Certificate::BallX, d, b, 0.0);
            }
            if let (Some(d), Some(b)) = (row.dist_z_star, row.bound_ball) {
                self.check(k, Certificate::BallZ, d, b, 0.0);
            }
        }
    }

    fn should_stop(&self) -> Option<StopReason> {
        let row = self.trace.rows.last()?;
        if let Some(tol) = self.cfg.stop.gradmap_tol {
            if row.gradmap <= tol {
                return Some(StopReason::GradientMapping);
            }
        }
        if let (Some(tol), Some(gap)) = (self.cfg.stop.gap_tol, row.gap) {
            if gap <= tol {
                return Some(StopReason::Gap);
            }
        }
        None
    }

    fn t(&mut self, k: usize) -> Option<f64> {
        self.seq.as_mut().and_then(|s| s.t(k))
    }

    fn run(mut self) -> Result<SolverTrace> {
        let t = self.p.operator().clone();
        let mut state = InertialState::new(self.x0);
        let mut pgm = self.cfg.certify.shadow.then(|| self.x0.to_vec());
        self.record(0, self.x0, &vec![0.0; self.x0.len()], None, None)?;
        self.shadow(0, &state.x, pgm.as_deref());
        let stop = loop {
            if let Some(reason) = self.should_stop() {
                break reason;
            }
            let k = state.k;
            if k >= self.cfg.stop.max_iter {
                break StopReason::MaxIter;
            }
            let alpha = match &mut self.seq {
                None => 0.0,
                Some(seq) => match seq.alpha(k) {
                    Some(a) => a,
                    None => break StopReason::ScheduleExhausted,
                },
            };
            state.step(&t, alpha);
            if let Some(v) = pgm.as_mut() {
                *v = t.value(v)?;
            }
            let (tp, tk) = (self.t(k), self.t(k + 1));
            let r = state.r();
            self.record(k + 1, &state.x.clone(), &r, tp, tk)?;
            self.shadow(k + 1, &state.x, pgm.as_deref());
        };
        self.trace.stop = stop;
        self.trace.iterations = state.k;
        self.trace.x_final = state.x;
        Ok(self.trace)
    }

    fn shadow(&mut self, k: usize, x: &[f64], pgm: Option<&[f64]>) {
        if let (Some(o), Some(v)) = (&self.oracle, pgm) {
            let rec = shadow_decomposition(&o.set, k, x, v);
            self.trace.shadow.push(rec);
        }
    }
}
