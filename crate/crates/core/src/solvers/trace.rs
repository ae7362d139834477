use std::collections::BTreeMap;
use std::io::Write;

use crate::error::Result;
use crate::schedules::Admissibility;

/// Column names of the trace CSV, in order.
pub const CSV_HEADER: &str = "iter,F,gap,xi,dist_S,gradmap,bound_rate,bound_xi,bound_ball";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Pgm,
    Apg,
}

/// Per-iteration scalars. Quantities that need the oracle are `None` when it
/// was not requested or not available.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// `F(x_k) = f(x_k) + ι_U(x_k)`.
    pub f: f64,
    /// `F(x_k) − μ`.
    pub gap: Option<f64>,
    /// `ξ_k = t_{k−1}²(F(x_k) − μ) + (lip/2)‖z_k − x*‖²`, APG with `k ≥ 1`.
    pub xi: Option<f64>,
    pub dist_s: Option<f64>,
    /// `‖G(x_k)‖`.
    pub gradmap: f64,
    pub bound_rate: Option<f64>,
    pub bound_xi: Option<f64>,
    pub bound_ball: Option<f64>,
    /// `‖x_k − x*‖`.
    pub dist_x_star: Option<f64>,
    /// `‖z_k − x*‖`.
    pub dist_z_star: Option<f64>,
}

/// Which iterates keep a full vector snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SnapshotPolicy {
    /// Every iterate up to and including this index is stored.
    pub dense_until: usize,
    /// Past `dense_until`, every `stride`-th iterate is stored.
    pub stride: usize,
}

impl Default for SnapshotPolicy {
    fn default() -> Self {
        SnapshotPolicy {
            dense_until: 1000,
            stride: 100,
        }
    }
}

impl SnapshotPolicy {
    pub fn keeps(&self, k: usize) -> bool {
        k <= self.dense_until || (self.stride > 0 && k % self.stride == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIter,
    GradientMapping,
    Gap,
    ScheduleExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// `F(x_k) − μ ≤ bound_rate`.
    Rate,
    /// `ξ_{k+1} ≤ ξ_k`.
    XiMonotone,
    /// `ξ_1 ≤ (lip/2)‖x_0 − x*‖²`.
    XiInitial,
    /// `‖x_k − x*‖ ≤ ‖x_0 − x*‖`.
    BallX,
    /// `‖z_k − x*‖ ≤ ‖x_0 − x*‖`.
    BallZ,
}

/// A failed certificate check: `lhs > rhs·(1 + slack)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CertViolation {
    pub iter: usize,
    pub certificate: Certificate,
    pub lhs: f64,
    pub rhs: f64,
    /// Set when the schedule does not satisfy the FISTA conditions, in which
    /// case the certificate is not guaranteed.
    pub informational: bool,
}

/// Shadow decomposition `s_k = x_k − T^k x_0` at one iteration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShadowRecord {
    pub iter: usize,
    /// `‖s_k‖`.
    pub s_norm: f64,
    /// `‖P_{par S} s_k‖`.
    pub par_s_norm: f64,
    /// `‖P_S x_k − P_S T^k x_0‖`.
    pub projection_gap: f64,
    /// `dist(x_k, S) + dist(T^k x_0, S)`.
    pub bound: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SolverTrace {
    pub algorithm: Algorithm,
    pub schedule: Option<String>,
    pub lip: f64,
    pub rows: Vec<TraceRow>,
    /// `x_k` for the iterations kept by the snapshot policy.
    pub snapshots: BTreeMap<usize, Vec<f64>>,
    pub x_final: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub violations: Vec<CertViolation>,
    pub unavailable: Vec<String>,
    pub admissibility: Option<Admissibility>,
    pub shadow: Vec<ShadowRecord>,
}

impl SolverTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has at least the initial row")
    }

    /// Violations that count against the run (not informational).
    pub fn hard_violations(&self) -> impl Iterator<Item = &CertViolation> {
        self.violations.iter().filter(|v| !v.informational)
    }

    /// Writes the scalar columns as CSV under [`CSV_HEADER`]; missing values
    /// are empty fields.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.iter,
                r.f,
                opt(r.gap),
                opt(r.xi),
                opt(r.dist_s),
                r.gradmap,
                opt(r.bound_rate),
                opt(r.bound_xi),
                opt(r.bound_ball)
            )?;
        }
        Ok(())
    }
}
