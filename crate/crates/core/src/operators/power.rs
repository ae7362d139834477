use super::LinearMap;
use crate::error::{Error, Result};
use crate::{random, vector};

/// Result of a power iteration on `A*A`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerEstimate {
    /// Rayleigh quotient at the last iterate; never above the true `‖A*A‖`.
    pub value: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Power iteration on `A*A` from a seeded Gaussian start. Stops once the
/// relative change of the Rayleigh quotient is at most `tol`.
pub fn power_iteration(a: &LinearMap, tol: f64, max_iter: usize, seed: u64) -> Result<PowerEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("power iteration tol must be > 0, got {tol}")));
    }
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return Ok(PowerEstimate {
            value: 0.0,
            iterations: 0,
            seed,
        });
    }
    let mut rng = random::rng(seed);
    let mut v = random::gaussian_vec(&mut rng, n);
    let nv = vector::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let ata = |v: &[f64]| -> Result<Vec<f64>> { a.adjoint_apply(&a.apply(v)?) };
    let mut w = ata(&v)?;
    let mut lambda = vector::dot(&v, &w);
    for it in 1..=max_iter {
        let nw = vector::norm(&w);
        if nw == 0.0 {
            return Ok(PowerEstimate {
                value: 0.0,
                iterations: it,
                seed,
            });
        }
        v = w.iter().map(|x| x / nw).collect();
        w = ata(&v)?;
        let next = vector::dot(&v, &w);
        let change = (next - lambda).abs();
        lambda = next;
        if change <= tol * lambda.abs() {
            return Ok(PowerEstimate {
                value: lambda,
                iterations: it,
                seed,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        estimate: lambda,
        last_iterate: v,
    })
}

/// Estimate of `‖A*A‖` (the square of the spectral norm of `A`).
pub fn operator_norm_sq(a: &LinearMap, tol: f64, max_iter: usize, seed: u64) -> Result<f64> {
    power_iteration(a, tol, max_iter, seed).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::row_sampling_map;
    use faer::Mat;

    #[test]
    fn row_sampling_has_unit_norm() {
        for idx in [vec![0usize], vec![1, 3, 4], (0..10).collect()] {
            let a = row_sampling_map(10, &idx).unwrap();
            let v = operator_norm_sq(&a, 1e-12, 1000, 1).unwrap();
            assert!((v - 1.0).abs() <= 1e-8, "{v}");
        }
    }

    #[test]
    fn diagonal() {
        let mut m = Mat::zeros(2, 2);
        m[(0, 0)] = 3.0;
        m[(1, 1)] = 1.0;
        let v = operator_norm_sq(&LinearMap::dense(m), 1e-14, 1000, 2).unwrap();
        assert!((v - 9.0).abs() <= 1e-8);
    }

    #[test]
    fn dense_gaussian_matches_svd() {
        let mut rng = random::rng(17);
        let m = random::gaussian_mat(&mut rng, 5, 3);
        let smax = m.singular_values().unwrap()[0];
        let v = operator_norm_sq(&LinearMap::dense(m), 1e-15, 100_000, 4).unwrap();
        assert!((v - smax * smax).abs() <= 1e-6, "{v} vs {}", smax * smax);
        assert!(v <= smax * smax * (1.0 + 1e-14));
    }

    #[test]
    fn rejects_bad_tol_and_reports_nonconvergence() {
        let a = LinearMap::identity(3);
        assert!(matches!(
            operator_norm_sq(&a, 0.0, 10, 0),
            Err(Error::Precondition(_))
        ));
        let mut m = Mat::zeros(2, 2);
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 0.999_999;
        match power_iteration(&LinearMap::dense(m), 1e-300, 3, 0) {
            Err(Error::NoConvergence { last_iterate, .. }) => assert_eq!(last_iterate.len(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
