//! The affine-quadratic problem `minimize ½‖Ax − b‖² subject to x ∈ U`, its
//! proximal-gradient operator `T = q + L`, and the dense solution-set oracle.

mod diagnostics;
mod oracle;

use std::sync::{Arc, OnceLock};

pub use diagnostics::{certify_error_bound, closedness_diagnostics, Diagnostics, ErrorBoundCertificate};
pub use oracle::{best_approximation, dist_to_s, energy_identity_check, solve_solution_set, SolutionSet};

use crate::error::{Error, Result};
use crate::operators::{power_iteration, AffineMap, AffineSubspace, LinearMap, PowerEstimate};
use crate::vector;

/// Multiplicative inflation applied to a power-iteration estimate before it is
/// used as the Lipschitz constant (Rayleigh quotients under-estimate).
pub const LIP_SAFETY: f64 = 1.0 + 1e-6;

/// Seed of the power iteration used for `lip`.
pub const LIP_SEED: u64 = 0x11b;

const LIP_TOL: f64 = 1e-12;
const LIP_MAX_ITER: usize = 200_000;

/// How the Lipschitz constant of `∇f` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Lip {
    /// Power-iteration estimate times [`LIP_SAFETY`].
    Auto,
    /// Given value, certified against the power-iteration estimate.
    Value(f64),
}

#[derive(Debug)]
pub struct AffineQuadraticProblem {
    a: LinearMap,
    b: Vec<f64>,
    u: AffineSubspace,
    lip: f64,
    lip_estimate: PowerEstimate,
    t: AffineMap,
    solution: OnceLock<Arc<SolutionSet>>,
}

impl AffineQuadraticProblem {
    pub fn new(a: LinearMap, b: Vec<f64>, u: AffineSubspace, lip: Lip) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::dim("problem b", a.rows(), b.len()));
        }
        if u.dim() != a.cols() {
            return Err(Error::dim("problem U", a.cols(), u.dim()));
        }
        let est = power_iteration(&a, LIP_TOL, LIP_MAX_ITER, LIP_SEED)?;
        let lip = match lip {
            Lip::Auto if est.value > 0.0 => est.value * LIP_SAFETY,
            Lip::Auto => 1.0,
            Lip::Value(v) => {
                if !(v > 0.0) || v < est.value - 1e-8 {
                    return Err(Error::LipTooSmall {
                        given: v,
                        estimate: est.value,
                    });
                }
                v
            }
        };
        let t = build_operator(&a, &b, &u, lip)?;
        Ok(AffineQuadraticProblem {
            a,
            b,
            u,
            lip,
            lip_estimate: est,
            t,
            solution: OnceLock::new(),
        })
    }

    /// `f = ½dist²(·, V)` over `U` for an affine `V = v₀ + par V`, rewritten as
    /// `½‖(Id − P_{par V})x − (Id − P_{par V})v₀‖²`.
    pub fn distance_to_affine(v: &AffineSubspace, u: AffineSubspace) -> Result<Self> {
        let n = v.dim();
        let a = LinearMap::scaled_sum(vec![
            (1.0, LinearMap::identity(n)),
            (-1.0, v.parallel_projector()),
        ])?;
        let v0 = v.anchor();
        let b = vector::sub(&v0, &v.project_parallel(&v0)?);
        Self::new(a, b, u, Lip::Value(1.0))
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn a(&self) -> &LinearMap {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn u(&self) -> &AffineSubspace {
        &self.u
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn lip_estimate(&self) -> PowerEstimate {
        self.lip_estimate
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::dim("problem point", self.dim(), x.len()));
        }
        Ok(())
    }

    /// `Ax − b`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(vector::sub(&self.a.apply(x)?, &self.b))
    }

    /// `f(x) = ½‖Ax − b‖²`.
    pub fn f(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * vector::norm_sq(&self.residual(x)?))
    }

    /// `F = f + ι_U`, with membership tested at `tol·(1 + ‖x‖)`.
    pub fn objective(&self, x: &[f64], tol: f64) -> Result<f64> {
        if self.u.contains(x, tol)? {
            self.f(x)
        } else {
            Ok(f64::INFINITY)
        }
    }

    /// `∇f(x) = A*(Ax − b)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.a.adjoint_apply(&self.residual(x)?)
    }

    /// `T = q + L` with `q = u₀ + (1/lip) P_{par U} A*b` and
    /// `L = P_{par U}(Id − (1/lip) A*A)`.
    pub fn operator(&self) -> &AffineMap {
        &self.t
    }

    /// The solution set, computed by the dense oracle on first use.
    pub fn solution_set(&self) -> Result<Arc<SolutionSet>> {
        if let Some(s) = self.solution.get() {
            return Ok(s.clone());
        }
        let s = Arc::new(solve_solution_set(self)?);
        Ok(self.solution.get_or_init(|| s).clone())
    }

    /// The solution set if it has already been computed.
    pub fn cached_solution_set(&self) -> Option<Arc<SolutionSet>> {
        self.solution.get().cloned()
    }
}

fn build_operator(a: &LinearMap, b: &[f64], u: &AffineSubspace, lip: f64) -> Result<AffineMap> {
    let n = a.cols();
    let par = u.parallel_projector();
    let step = LinearMap::scaled_sum(vec![(1.0, LinearMap::identity(n)), (-1.0 / lip, a.normal())])?;
    let linear = LinearMap::compose(vec![par, step])?;
    let mut q = u.anchor();
    let pb = u.project_parallel(&a.adjoint_apply(b)?)?;
    vector::axpy(1.0 / lip, &pb, &mut q);
    AffineMap::new(linear, q)
}

/// `T` built from the problem data; same as [`AffineQuadraticProblem::operator`].
pub fn prox_grad_operator(p: &AffineQuadraticProblem) -> AffineMap {
    p.operator().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, RandomSpec};
    use crate::vector::{dist, norm};
    use faer::Mat;

    #[test]
    fn gradient_matches_finite_differences() {
        let p = random::random_problem(RandomSpec::for_dims(7, 5), 3).unwrap();
        let mut rng = random::rng(4);
        for _ in 0..5 {
            let x = random::gaussian_vec(&mut rng, 7);
            let g = p.gradient(&x).unwrap();
            let h = 1e-6;
            for i in 0..7 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (p.f(&xp).unwrap() - p.f(&xm).unwrap()) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn operator_matches_two_step_formula() {
        let spec = RandomSpec {
            n: 4,
            m: 6,
            rank: 3,
            constraints: 1,
        };
        let p = random::random_problem(spec, 9).unwrap();
        let mut rng = random::rng(10);
        for _ in 0..20 {
            let x = random::gaussian_vec(&mut rng, 4);
            let g = p.gradient(&x).unwrap();
            let step: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gi / p.lip()).collect();
            let want = p.u().project(&step).unwrap();
            let got = p.operator().value(&x).unwrap();
            assert!(dist(&got, &want) <= 1e-12 * (1.0 + norm(&x)));
        }
    }

    #[test]
    fn identity_with_unit_lip_is_zero_map() {
        let p = AffineQuadraticProblem::new(
            LinearMap::identity(3),
            vec![0.0; 3],
            AffineSubspace::whole(3),
            Lip::Value(1.0),
        )
        .unwrap();
        assert_eq!(p.operator().value(&[1.0, -2.0, 5.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn lip_certification() {
        let mut m = Mat::zeros(2, 2);
        m[(0, 0)] = 3.0;
        m[(1, 1)] = 1.0;
        let a = LinearMap::dense(m);
        let err = AffineQuadraticProblem::new(a.clone(), vec![0.0; 2], AffineSubspace::whole(2), Lip::Value(8.0))
            .unwrap_err();
        assert!(matches!(err, Error::LipTooSmall { .. }));
        let p = AffineQuadraticProblem::new(a, vec![0.0; 2], AffineSubspace::whole(2), Lip::Auto).unwrap();
        assert!(p.lip() >= 9.0 - 1e-8 && p.lip() <= 9.0 * (1.0 + 2e-6));
    }

    #[test]
    fn operator_is_nonexpansive() {
        let p = random::random_problem(RandomSpec::for_dims(12, 8), 5).unwrap();
        let mut rng = random::rng(6);
        for _ in 0..100 {
            let x = random::gaussian_vec(&mut rng, 12);
            let y = random::gaussian_vec(&mut rng, 12);
            let t = p.operator();
            let lhs = dist(&t.value(&x).unwrap(), &t.value(&y).unwrap());
            assert!(lhs <= dist(&x, &y) + 1e-12);
        }
    }

    #[test]
    fn fixed_points_are_solutions() {
        let p = random::random_problem(RandomSpec::for_dims(12, 8), 7).unwrap();
        let s = p.solution_set().unwrap();
        let t = p.operator();
        let mut rng = random::rng(8);
        for _ in 0..10 {
            let z = random::gaussian_vec(&mut rng, s.dim_par_s());
            let x = s.point(&z);
            assert!(dist(&t.value(&x).unwrap(), &x) <= 1e-8);
        }
        // Non-solutions in U: ‖x − Tx‖ = ‖P_{par U}∇f(x)‖/lip > 0.
        for _ in 0..10 {
            let x = p.u().project(&random::gaussian_vec(&mut rng, 12)).unwrap();
            if s.dist(&x) < 1e-6 {
                continue;
            }
            let moved = dist(&t.value(&x).unwrap(), &x);
            let predicted = norm(&p.u().project_parallel(&p.gradient(&x).unwrap()).unwrap()) / p.lip();
            assert!(moved > 0.0);
            assert!((moved - predicted).abs() <= 1e-10 * (1.0 + predicted));
        }
    }

    #[test]
    fn affine_distance_rewrite() {
        // V = {x₂ = 0.5}, U = {x₁ + x₂ = 1}: S = U ∩ V = {(0.5, 0.5)}.
        let v = AffineSubspace::hyperplane(vec![0.0, 1.0], 0.5).unwrap();
        let u = AffineSubspace::hyperplane(vec![1.0, 1.0], 1.0).unwrap();
        let p = AffineQuadraticProblem::distance_to_affine(&v, u).unwrap();
        let x = [0.3, 2.0];
        let want = 0.5 * (2.0f64 - 0.5).powi(2);
        assert!((p.f(&x).unwrap() - want).abs() < 1e-14);
        let s = p.solution_set().unwrap();
        assert!(dist(s.anchor(), &[0.5, 0.5]) < 1e-12);
        assert_eq!(s.dim_par_s(), 0);
    }
}
