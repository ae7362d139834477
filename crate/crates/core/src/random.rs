//! Seeded random data: vectors, Gaussian matrices, and rank-deficient test instances.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{AffineSubspace, LinearMap};
use crate::problem::{AffineQuadraticProblem, Lip};
use crate::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn uniform_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn gaussian_mat(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat<f64> {
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// `rows × k` matrix with orthonormal columns spanning a random subspace.
pub fn orthonormal_columns(rng: &mut impl Rng, rows: usize, k: usize) -> Mat<f64> {
    assert!(k <= rows);
    if k == 0 {
        return Mat::zeros(rows, 0);
    }
    let g = gaussian_mat(rng, rows, k);
    let qr = g.qr();
    qr.compute_thin_Q()
}

/// Shape parameters of a random affine-quadratic instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RandomSpec {
    /// Ambient dimension.
    pub n: usize,
    /// Rows of `A`.
    pub m: usize,
    /// Rank of `A` (rank-deficient when `< min(m, n)`).
    pub rank: usize,
    /// Number of affine constraints (rows of the orthonormal `C`).
    pub constraints: usize,
}

impl RandomSpec {
    /// Default shape for an `m × n` instance: rank about half of `min(m, n)` and
    /// about `n/5` constraints, keeping `dim(ker A ∩ par U) ≥ 1`.
    pub fn for_dims(n: usize, m: usize) -> Self {
        let rank = (m.min(n) / 2).max(1);
        let mut constraints = n / 5;
        while constraints > 0 && n < rank + constraints + 1 {
            constraints -= 1;
        }
        RandomSpec {
            n,
            m,
            rank,
            constraints,
        }
    }
}

/// Dense rank-deficient instance: `A = W Σ Zᵀ` with singular values in `[0.5, 2]`,
/// `U = {x : Cx = d}` with `C` random orthonormal rows, and `b` generic so that
/// the optimal value is typically positive.
pub fn random_problem(spec: RandomSpec, seed: u64) -> Result<AffineQuadraticProblem> {
    let mut rng = rng(seed);
    let RandomSpec {
        n,
        m,
        rank,
        constraints,
    } = spec;
    let rank = rank.min(m).min(n);
    let w = orthonormal_columns(&mut rng, m, rank);
    let z = orthonormal_columns(&mut rng, n, rank);
    let sigmas: Vec<f64> = (0..rank).map(|_| rng.random_range(0.5..2.0)).collect();
    let a = Mat::from_fn(m, n, |i, j| {
        (0..rank).map(|l| w[(i, l)] * sigmas[l] * z[(j, l)]).sum()
    });
    let c_cols = orthonormal_columns(&mut rng, n, constraints);
    let c = c_cols.transpose().to_owned();
    let d = gaussian_vec(&mut rng, constraints);
    let b = gaussian_vec(&mut rng, m);
    let u = AffineSubspace::orthonormal_rows(LinearMap::dense(c), d)?;
    AffineQuadraticProblem::new(LinearMap::dense(a), b, u, Lip::Auto)
}
