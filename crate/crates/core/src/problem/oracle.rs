use faer::{ColRef, Mat};

use super::AffineQuadraticProblem;
use crate::error::{Error, Result};
use crate::vector;

/// Singular values at or below `RANK_TOL·max(σ_max, ‖A‖)` are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// `S = anchor + span(basis)`, the solution set of a problem, together with
/// the spectral data of `AB` it was computed from (`B` a basis of `par U`).
#[derive(Debug, Clone)]
pub struct SolutionSet {
    anchor: Vec<f64>,
    basis: Mat<f64>,
    mu: f64,
    rank: usize,
    sigma_max: f64,
    sigma_min_pos: f64,
    dim_par_u: usize,
}

impl SolutionSet {
    /// `P_S 0`, the minimum-norm solution.
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Orthonormal basis of `par S = ker A ∩ par U` (columns).
    pub fn basis(&self) -> &Mat<f64> {
        &self.basis
    }

    /// Optimal value `μ`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn dim_par_s(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim_par_u(&self) -> usize {
        self.dim_par_u
    }

    /// Rank of `AB`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    /// Smallest singular value of `AB` above the rank threshold (0 if `AB = 0`).
    pub fn sigma_min_pos(&self) -> f64 {
        self.sigma_min_pos
    }

    /// `anchor + basis·z`.
    pub fn point(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.anchor.clone();
        if !z.is_empty() {
            let y = self.basis.as_ref() * ColRef::from_slice(z);
            for (xi, yi) in x.iter_mut().zip(y.iter()) {
                *xi += yi;
            }
        }
        x
    }

    /// `P_{par S} v`.
    pub fn project_parallel(&self, v: &[f64]) -> Vec<f64> {
        if self.basis.ncols() == 0 {
            return vec![0.0; v.len()];
        }
        let coords = self.basis.transpose() * ColRef::from_slice(v);
        let y = self.basis.as_ref() * &coords;
        y.iter().copied().collect()
    }

    /// `P_S x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let d = vector::sub(x, &self.anchor);
        vector::add(&self.anchor, &self.project_parallel(&d))
    }

    /// `dist(x, S)`.
    pub fn dist(&self, x: &[f64]) -> f64 {
        vector::dist(x, &self.project(x))
    }
}

/// Computes `S` from a reduced SVD of `AB`, where `U = u₀ + span(B)`, taking
/// the minimum-norm least-squares coefficient. Refused above the oracle cap.
pub fn solve_solution_set(p: &AffineQuadraticProblem) -> Result<SolutionSet> {
    solve_with_cap(p, crate::oracle_cap())
}

pub(crate) fn solve_with_cap(p: &AffineQuadraticProblem, cap: usize) -> Result<SolutionSet> {
    let n = p.dim();
    if n > cap {
        return Err(Error::OracleCap { dim: n, cap });
    }
    let form = p.u().to_basis(cap)?;
    let b_mat = form.basis;
    let u0 = form.anchor;
    let k = b_mat.ncols();
    let m = p.a().rows();
    let dim_par_u = k;

    let finish = |anchor: Vec<f64>, basis: Mat<f64>, rank, sigma_max, sigma_min_pos| -> Result<SolutionSet> {
        let mu = p.f(&anchor)?;
        Ok(SolutionSet {
            anchor,
            basis,
            mu,
            rank,
            sigma_max,
            sigma_min_pos,
            dim_par_u,
        })
    };
    if k == 0 || m == 0 {
        return finish(u0, b_mat, 0, 0.0, 0.0);
    }

    let ab = apply_columns(p, &b_mat)?;
    let svd = ab
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD of AB failed: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let smax = s.iter().copied().fold(0.0f64, f64::max);
    // scale by ‖A‖ too, so that AB made only of rounding noise has rank 0
    let scale = smax.max(p.lip_estimate().value.sqrt());
    let rank = s.iter().filter(|&&v| v > RANK_TOL * scale && v > 0.0).count();
    let smin = if rank == 0 { 0.0 } else { s[rank - 1] };

    // z = V_r Σ_r⁻¹ U_rᵀ (b − A u₀)
    let r0 = vector::sub(p.b(), &p.a().apply(&u0)?);
    let u_r = svd.U().subcols(0, rank);
    let v_r = svd.V().subcols(0, rank);
    let mut c = u_r.transpose() * ColRef::from_slice(&r0);
    for i in 0..rank {
        c[i] /= s[i];
    }
    let z = v_r * &c;
    let bz = b_mat.as_ref() * &z;
    let anchor: Vec<f64> = u0.iter().zip(bz.iter()).map(|(a, b)| a + b).collect();
    let basis = b_mat.as_ref() * svd.V().subcols(rank, k - rank);
    finish(anchor, basis, rank, smax, smin)
}

fn apply_columns(p: &AffineQuadraticProblem, b: &Mat<f64>) -> Result<Mat<f64>> {
    if let Some(a) = p.a().as_dense() {
        return Ok(a.as_ref() * b.as_ref());
    }
    let m = p.a().rows();
    let mut out = Mat::zeros(m, b.ncols());
    let mut col = vec![0.0; b.nrows()];
    for j in 0..b.ncols() {
        for (i, v) in col.iter_mut().enumerate() {
            *v = b[(i, j)];
        }
        let y = p.a().apply(&col)?;
        for (i, v) in y.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// `P_S x₀`, the point PGM iterates converge to from `x₀`.
pub fn best_approximation(p: &AffineQuadraticProblem, x0: &[f64]) -> Result<Vec<f64>> {
    if x0.len() != p.dim() {
        return Err(Error::dim("best_approximation", p.dim(), x0.len()));
    }
    Ok(p.solution_set()?.project(x0))
}

/// `dist(x, S)`.
pub fn dist_to_s(p: &AffineQuadraticProblem, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::dim("dist_to_s", p.dim(), x.len()));
    }
    Ok(p.solution_set()?.dist(x))
}

/// Both sides of `‖A(x − x̄)‖² = 2(f(x) − μ)` for `x ∈ U`, `x̄ ∈ S`.
/// Membership is required within `1e-8·(1 + ‖x‖)`.
pub fn energy_identity_check(p: &AffineQuadraticProblem, x: &[f64], xbar: &[f64]) -> Result<(f64, f64)> {
    if !p.u().contains(x, 1e-8)? {
        return Err(Error::Precondition("energy identity requires x ∈ U".into()));
    }
    let s = p.solution_set()?;
    let lhs = vector::norm_sq(&p.a().apply(&vector::sub(x, xbar))?);
    let rhs = 2.0 * (p.f(x)? - s.mu());
    Ok((lhs, rhs))
}
