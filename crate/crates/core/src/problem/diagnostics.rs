use faer::Mat;

use super::AffineQuadraticProblem;
use crate::error::{Error, Result};
use crate::operators::null_space_of_rows;
use crate::{random, vector};

/// Closedness data for the pair `(par U, ker A)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostics {
    /// Cosine of the Friedrichs angle between `par U` and `ker A`.
    pub friedrichs_cos: f64,
    /// `C = 1/σ_min⁺(AB)`; 0 when `AB = 0`.
    pub error_bound_c: f64,
    pub dim_par_u: usize,
    pub dim_ker_a: usize,
    pub dim_par_s: usize,
    pub mu: f64,
}

/// Computes [`Diagnostics`]. Principal cosines come from an SVD of `PᵀK` with
/// `P`, `K` orthonormal bases of `par U` and `ker A`; the `dim par S` leading
/// cosines belong to the intersection and are skipped.
pub fn closedness_diagnostics(p: &AffineQuadraticProblem) -> Result<Diagnostics> {
    let cap = crate::oracle_cap();
    let s = p.solution_set()?;
    let pu = p.u().to_basis(cap)?.basis;
    let k = null_space_of_rows(&p.a().to_dense())?;
    let dim_par_s = s.dim_par_s();
    let friedrichs_cos = if pu.ncols() == 0 || k.ncols() == 0 {
        0.0
    } else {
        let m: Mat<f64> = pu.transpose() * k.as_ref();
        let mut cos: Vec<f64> = m
            .singular_values()
            .map_err(|e| Error::LinearAlgebra(format!("SVD of PᵀK failed: {e:?}")))?;
        cos.sort_by(|a, b| b.total_cmp(a));
        cos.get(dim_par_s).copied().unwrap_or(0.0).min(1.0)
    };
    let error_bound_c = if s.rank() == 0 { 0.0 } else { 1.0 / s.sigma_min_pos() };
    Ok(Diagnostics {
        friedrichs_cos,
        error_bound_c,
        dim_par_u: pu.ncols(),
        dim_ker_a: k.ncols(),
        dim_par_s,
        mu: s.mu(),
    })
}

/// Outcome of sampling `dist(x, par S) ≤ C‖Ax‖` over `x ∈ par U`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorBoundCertificate {
    pub samples: usize,
    pub violations: usize,
    /// Largest `dist(x, par S)/(C‖Ax‖)` seen.
    pub worst_ratio: f64,
}

/// Checks the error bound on `samples` seeded Gaussian points of `par U`,
/// with relative slack `slack` on both the bound and `‖x‖`.
pub fn certify_error_bound(
    p: &AffineQuadraticProblem,
    c: f64,
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<ErrorBoundCertificate> {
    let s = p.solution_set()?;
    let pu = p.u().to_basis(crate::oracle_cap())?.basis;
    let mut rng = random::rng(seed);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = random::gaussian_vec(&mut rng, pu.ncols());
        let x: Vec<f64> = if z.is_empty() {
            vec![0.0; p.dim()]
        } else {
            (pu.as_ref() * faer::ColRef::from_slice(&z)).iter().copied().collect()
        };
        let d = vector::dist(&x, &s.project_parallel(&x));
        let bound = c * vector::norm(&p.a().apply(&x)?);
        // the ‖x‖ term absorbs rounding in the projection when par U ⊆ par S
        if d > bound * (1.0 + slack) + slack * vector::norm(&x) {
            violations += 1;
        }
        if bound > 0.0 {
            worst = worst.max(d / bound);
        } else if d > slack * vector::norm(&x) {
            worst = f64::INFINITY;
        }
    }
    Ok(ErrorBoundCertificate {
        samples,
        violations,
        worst_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{AffineSubspace, LinearMap};
    use crate::problem::Lip;
    use crate::random::RandomSpec;

    #[test]
    fn lines_at_45_degrees() {
        // par U = span(1, 0), ker A = span(1, 1)/√2.
        let a = LinearMap::dense_from_rows(1, 2, &[1.0, -1.0]).unwrap();
        let u = AffineSubspace::hyperplane(vec![0.0, 1.0], 0.0).unwrap();
        let p = AffineQuadraticProblem::new(a, vec![0.0], u, Lip::Auto).unwrap();
        let d = closedness_diagnostics(&p).unwrap();
        assert!((d.friedrichs_cos - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(d.dim_par_s, 0);
        assert!((d.error_bound_c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contained_kernel_gives_zero_cosine() {
        // ker A = span(e₂) ⊂ par U = ℝ²: the only principal cosine is the intersection.
        let a = LinearMap::dense_from_rows(1, 2, &[1.0, 0.0]).unwrap();
        let p = AffineQuadraticProblem::new(a, vec![1.0], AffineSubspace::whole(2), Lip::Auto).unwrap();
        let d = closedness_diagnostics(&p).unwrap();
        assert_eq!(d.friedrichs_cos, 0.0);
        assert_eq!(d.dim_par_s, 1);
    }

    #[test]
    fn error_bound_holds_on_random_instances() {
        for seed in 0..5 {
            let p = crate::random::random_problem(RandomSpec::for_dims(20, 12), seed).unwrap();
            let d = closedness_diagnostics(&p).unwrap();
            assert!(d.friedrichs_cos < 1.0);
            let cert = certify_error_bound(&p, d.error_bound_c, 50, seed, 1e-8).unwrap();
            assert_eq!(cert.violations, 0, "{cert:?}");
            assert!(cert.worst_ratio <= 1.0 + 1e-8);
        }
    }
}
