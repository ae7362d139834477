//! Proximal-gradient (PGM) and accelerated proximal-gradient (APG/FISTA-family)
//! methods for affine-quadratic problems
//!
//! ```text
//! minimize ½‖Ax − b‖²  subject to  x ∈ U,   U a closed affine subspace,
//! ```
//!
//! together with the machinery needed to certify, on desk-scale instances, that
//! the APG iterates converge to `P_S x₀`, the point of the solution set closest
//! to the starting point, exactly as the PGM iterates do.
//!
//! Modules:
//! - [`operators`]: matrix-free linear/affine maps, projections, DCT, power iteration.
//! - [`problem`]: the problem model, the proximal-gradient operator `T = q + L`,
//!   and the dense solution-set oracle.
//! - [`schedules`]: momentum parameter sequences and their admissibility checks.
//! - [`solvers`]: PGM and inertial APG runs with per-iteration certificates.
//! - [`counterexample`]: exact rational reproduction of the cone/affine example
//!   where the two limits differ.
//! - [`inpaint`]: DCT-constrained image recovery from several initializations.
//! - [`io`]: CSV / binary / PGM readers and writers and the problem descriptor.

pub mod counterexample;
pub mod error;
pub mod inpaint;
pub mod io;
pub mod operators;
pub mod problem;
pub mod random;
pub mod schedules;
pub mod solvers;
pub mod vector;

pub use error::{Error, Result};
pub use operators::{AffineMap, AffineSubspace, LinearMap, MapKind};
pub use problem::{AffineQuadraticProblem, Diagnostics, Lip, SolutionSet};
pub use schedules::{Schedule, ScheduleFamily};
pub use solvers::{CertifyFlags, SolverTrace, StopRule};

/// Default dimension cap for the dense solution-set oracle.
pub const DEFAULT_ORACLE_CAP: usize = 4096;

/// Environment variable overriding [`DEFAULT_ORACLE_CAP`].
pub const ORACLE_CAP_ENV: &str = "APGKIT_ORACLE_CAP";

thread_local! {
    static CAP_OVERRIDE: std::cell::Cell<Option<usize>> = const { std::cell::Cell::new(None) };
}

/// Oracle dimension cap: a [`with_oracle_cap`] override on this thread, else
/// `APGKIT_ORACLE_CAP` when it parses, else [`DEFAULT_ORACLE_CAP`].
pub fn oracle_cap() -> usize {
    if let Some(cap) = CAP_OVERRIDE.with(|c| c.get()) {
        return cap;
    }
    std::env::var(ORACLE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_CAP)
}

/// Runs `f` with the oracle cap set to `cap` on the current thread.
pub fn with_oracle_cap<R>(cap: usize, f: impl FnOnce() -> R) -> R {
    let prev = CAP_OVERRIDE.with(|c| c.replace(Some(cap)));
    let out = f();
    CAP_OVERRIDE.with(|c| c.set(prev));
    out
}
