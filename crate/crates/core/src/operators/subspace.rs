use std::sync::Arc;

use faer::col::ColRef;
use faer::Mat;

use super::LinearMap;
use crate::error::{Error, Result};
use crate::{random, vector};

const ORTHO_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
enum Repr {
    /// `{x : Cx = d}` with `CCᵀ = Id`.
    OrthonormalRows { c: LinearMap, d: Vec<f64> },
    /// `{x : ⟨normal, x⟩ = offset}`.
    Hyperplane { normal: Vec<f64>, offset: f64 },
    /// `anchor + span(basis)`, basis columns orthonormal.
    Basis { anchor: Vec<f64>, basis: Arc<Mat<f64>> },
}

/// Which representation an [`AffineSubspace`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    OrthonormalRows,
    Hyperplane,
    Basis,
}

/// A closed affine subspace `U` of `ℝⁿ`.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    dim: usize,
    repr: Repr,
}

/// `U = anchor + span(basis)` with `anchor = P_U 0` and orthonormal basis columns.
#[derive(Debug, Clone)]
pub struct BasisForm {
    pub anchor: Vec<f64>,
    pub basis: Mat<f64>,
}

/// Orthogonal projection onto `sub`.
pub fn project_affine(sub: &AffineSubspace, x: &[f64]) -> Result<Vec<f64>> {
    sub.project(x)
}

impl AffineSubspace {
    pub fn orthonormal_rows(c: LinearMap, d: Vec<f64>) -> Result<Self> {
        if d.len() != c.rows() {
            return Err(Error::dim("orthonormal-rows right-hand side", c.rows(), d.len()));
        }
        let mut rng = random::rng(0x5eed_u64.wrapping_add(c.rows() as u64));
        for _ in 0..3 {
            let y = random::gaussian_vec(&mut rng, c.rows());
            let back = c.apply(&c.adjoint_apply(&y)?)?;
            if vector::dist(&back, &y) > ORTHO_TOL * vector::norm(&y) {
                return Err(Error::InvalidSubspace(
                    "rows of C are not orthonormal (CCᵀ ≠ Id)".into(),
                ));
            }
        }
        Ok(AffineSubspace {
            dim: c.cols(),
            repr: Repr::OrthonormalRows { c, d },
        })
    }

    /// The whole space `ℝⁿ` (no constraints).
    pub fn whole(n: usize) -> Self {
        AffineSubspace {
            dim: n,
            repr: Repr::OrthonormalRows {
                c: LinearMap::row_sampling(n, Vec::new()).expect("empty sampling is valid"),
                d: Vec::new(),
            },
        }
    }

    pub fn hyperplane(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if vector::norm(&normal) == 0.0 {
            return Err(Error::InvalidSubspace("hyperplane normal is zero".into()));
        }
        Ok(AffineSubspace {
            dim: normal.len(),
            repr: Repr::Hyperplane { normal, offset },
        })
    }

    pub fn from_basis(anchor: Vec<f64>, basis: Mat<f64>) -> Result<Self> {
        if basis.nrows() != anchor.len() {
            return Err(Error::dim("basis rows", anchor.len(), basis.nrows()));
        }
        let k = basis.ncols();
        if k > 0 {
            let gram = basis.transpose() * &basis;
            for i in 0..k {
                for j in 0..k {
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (gram[(i, j)] - want).abs() > ORTHO_TOL {
                        return Err(Error::InvalidSubspace("basis columns are not orthonormal".into()));
                    }
                }
            }
        }
        Ok(AffineSubspace {
            dim: anchor.len(),
            repr: Repr::Basis {
                anchor,
                basis: Arc::new(basis),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> Representation {
        match self.repr {
            Repr::OrthonormalRows { .. } => Representation::OrthonormalRows,
            Repr::Hyperplane { .. } => Representation::Hyperplane,
            Repr::Basis { .. } => Representation::Basis,
        }
    }

    /// `(C, d)` for the orthonormal-rows representation.
    pub fn constraint_rows(&self) -> Option<(&LinearMap, &[f64])> {
        match &self.repr {
            Repr::OrthonormalRows { c, d } => Some((c, d)),
            _ => None,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::dim("AffineSubspace", self.dim, x.len()));
        }
        Ok(())
    }

    /// `P_U x`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match &self.repr {
            Repr::OrthonormalRows { c, d } => {
                let r = vector::sub(&c.apply(x)?, d);
                vector::sub(x, &c.adjoint_apply(&r)?)
            }
            Repr::Hyperplane { normal, offset } => {
                let s = (vector::dot(normal, x) - offset) / vector::norm_sq(normal);
                x.iter().zip(normal).map(|(xi, ni)| xi - s * ni).collect()
            }
            Repr::Basis { anchor, basis } => {
                let diff = vector::sub(x, anchor);
                vector::add(anchor, &basis_project(basis, &diff))
            }
        })
    }

    /// `P_{par U} x`, the linear part of `P_U`.
    pub fn project_parallel(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match &self.repr {
            Repr::OrthonormalRows { c, .. } => vector::sub(x, &c.adjoint_apply(&c.apply(x)?)?),
            Repr::Hyperplane { normal, .. } => {
                let s = vector::dot(normal, x) / vector::norm_sq(normal);
                x.iter().zip(normal).map(|(xi, ni)| xi - s * ni).collect()
            }
            Repr::Basis { basis, .. } => basis_project(basis, x),
        })
    }

    /// `u₀ = P_U 0`.
    pub fn anchor(&self) -> Vec<f64> {
        self.project(&vec![0.0; self.dim]).expect("dimension matches")
    }

    /// Residual of the defining equations at `x`; zero exactly on `U`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.repr {
            Repr::OrthonormalRows { c, d } => vector::dist(&c.apply(x)?, d),
            Repr::Hyperplane { normal, offset } => {
                (vector::dot(normal, x) - offset).abs() / vector::norm(normal)
            }
            Repr::Basis { .. } => vector::dist(x, &self.project(x)?),
        })
    }

    /// Membership with tolerance `tol·(1 + ‖x‖)`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.residual(x)? <= tol * (1.0 + vector::norm(x)))
    }

    /// `P_{par U}` as a [`LinearMap`].
    pub fn parallel_projector(&self) -> LinearMap {
        let n = self.dim;
        let id = LinearMap::identity(n);
        match &self.repr {
            Repr::OrthonormalRows { c, .. } => {
                if c.rows() == 0 {
                    return id;
                }
                LinearMap::scaled_sum(vec![(1.0, id), (-1.0, c.normal())])
                    .expect("dimensions agree")
            }
            Repr::Hyperplane { normal, .. } => {
                let nn = vector::norm(normal);
                let row = Mat::from_fn(1, n, |_, j| normal[j] / nn);
                LinearMap::scaled_sum(vec![(1.0, id), (-1.0, LinearMap::dense(row).normal())])
                    .expect("dimensions agree")
            }
            Repr::Basis { basis, .. } => LinearMap::dense((**basis).clone()).adjoint().normal(),
        }
    }

    /// Converts to `anchor + span(basis)`. Dense work is refused above `cap`.
    pub fn to_basis(&self, cap: usize) -> Result<BasisForm> {
        let n = self.dim;
        if n > cap {
            return Err(Error::OracleCap { dim: n, cap });
        }
        let anchor = self.anchor();
        let basis = match &self.repr {
            Repr::Basis { basis, .. } => (**basis).clone(),
            Repr::Hyperplane { normal, .. } => {
                let col = Mat::from_fn(n, 1, |i, _| normal[i]);
                null_space_of_rows(&col.transpose().to_owned())?
            }
            Repr::OrthonormalRows { c, .. } => {
                if let Some(rows) = c.sampled_indices() {
                    // Rows of the identity: complement is the unsampled unit vectors.
                    let rest = complement(n, rows);
                    let mut b = Mat::zeros(n, rest.len());
                    for (j, &i) in rest.iter().enumerate() {
                        b[(i, j)] = 1.0;
                    }
                    b
                } else if let Some((parent, rows)) = c.row_subset() {
                    // Rows of an orthogonal map: complement is the remaining rows.
                    let rest = complement(n, rows);
                    let mut b = Mat::zeros(n, rest.len());
                    let mut e = vec![0.0; n];
                    for (j, &r) in rest.iter().enumerate() {
                        e[r] = 1.0;
                        let col = parent.adjoint_apply(&e)?;
                        e[r] = 0.0;
                        for (i, v) in col.into_iter().enumerate() {
                            b[(i, j)] = v;
                        }
                    }
                    b
                } else {
                    null_space_of_rows(&c.to_dense())?
                }
            }
        };
        Ok(BasisForm { anchor, basis })
    }
}

fn complement(n: usize, rows: &[usize]) -> Vec<usize> {
    let mut used = vec![false; n];
    for &r in rows {
        used[r] = true;
    }
    (0..n).filter(|&i| !used[i]).collect()
}

/// `B Bᵀ x`.
fn basis_project(basis: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    if basis.ncols() == 0 {
        return vec![0.0; x.len()];
    }
    let coords = basis.transpose() * ColRef::from_slice(x);
    let y = basis.as_ref() * &coords;
    y.iter().copied().collect()
}

/// Orthonormal basis of `{x : Mx = 0}` for a dense `m × n` matrix `M`, via a
/// full SVD with the rank threshold `1e-10·σ_max`.
pub(crate) fn null_space_of_rows(m: &Mat<f64>) -> Result<Mat<f64>> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Ok(Mat::identity(n, n));
    }
    let svd = m
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let smax = s.iter().copied().fold(0.0f64, f64::max);
    let rank = s.iter().filter(|&&v| v > 1e-10 * smax && v > 0.0).count();
    Ok(svd.V().subcols(rank, n - rank).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dct2d_map;
    use crate::vector::{dist, dot, norm, sub};

    fn hyper() -> AffineSubspace {
        AffineSubspace::hyperplane(vec![1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn hyperplane_examples() {
        let u = hyper();
        let p = u.project(&[5.0, 0.0]).unwrap();
        assert!(dist(&p, &[3.0, -2.0]) < 1e-15);
        assert_eq!(u.project(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn orthonormal_rows_example() {
        let c = LinearMap::row_sampling(4, vec![0]).unwrap();
        let u = AffineSubspace::orthonormal_rows(c, vec![2.0]).unwrap();
        let p = u.project(&[0.0, 3.0, 1.0, -1.0]).unwrap();
        assert_eq!(p, vec![2.0, 3.0, 1.0, -1.0]);
    }

    #[test]
    fn rejects_non_orthonormal_rows() {
        let mut m = Mat::zeros(1, 3);
        m[(0, 0)] = 2.0;
        let err = AffineSubspace::orthonormal_rows(LinearMap::dense(m), vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidSubspace(_)));
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let b = Mat::from_fn(3, 2, |i, j| if i == j { 1.0 } else { 0.5 });
        assert!(AffineSubspace::from_basis(vec![0.0; 3], b).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            hyper().project(&[1.0, 2.0, 3.0]),
            Err(Error::Dimension { .. })
        ));
    }

    fn samples() -> Vec<AffineSubspace> {
        let mut rng = random::rng(21);
        let c = random::orthonormal_columns(&mut rng, 6, 2).transpose().to_owned();
        let b = random::orthonormal_columns(&mut rng, 6, 3);
        vec![
            AffineSubspace::orthonormal_rows(LinearMap::dense(c), vec![1.0, -2.0]).unwrap(),
            AffineSubspace::hyperplane(random::gaussian_vec(&mut rng, 6), 0.7).unwrap(),
            AffineSubspace::from_basis(random::gaussian_vec(&mut rng, 6), b).unwrap(),
            AffineSubspace::whole(6),
        ]
    }

    #[test]
    fn projection_properties() {
        let mut rng = random::rng(22);
        for u in samples() {
            for _ in 0..20 {
                let x = random::gaussian_vec(&mut rng, 6);
                let y = random::gaussian_vec(&mut rng, 6);
                let px = u.project(&x).unwrap();
                let py = u.project(&y).unwrap();
                assert!(u.residual(&px).unwrap() <= 1e-10 * (1.0 + norm(&x)));
                assert!(dist(&u.project(&px).unwrap(), &px) <= 1e-10);
                // x − P_U x ⟂ par U
                let v = u.project_parallel(&y).unwrap();
                assert!(dot(&sub(&x, &px), &v).abs() <= 1e-10 * (1.0 + norm(&x) * norm(&y)));
                // firm nonexpansiveness
                let d = sub(&px, &py);
                assert!(dot(&d, &sub(&x, &y)) >= norm(&d).powi(2) - 1e-10);
                // P_U = u₀ + P_{par U}
                let alt = vector::add(&u.anchor(), &u.project_parallel(&x).unwrap());
                assert!(dist(&alt, &px) <= 1e-12 * (1.0 + norm(&x)));
                let lin = u.parallel_projector().apply(&x).unwrap();
                assert!(dist(&lin, &u.project_parallel(&x).unwrap()) <= 1e-12 * (1.0 + norm(&x)));
            }
        }
    }

    #[test]
    fn basis_conversion_agrees_with_projection() {
        let mut rng = random::rng(23);
        let q = dct2d_map(3);
        let rows = LinearMap::orthonormal_rows(q, vec![0, 4, 7]).unwrap();
        let mut all = samples();
        all.push(AffineSubspace::orthonormal_rows(rows, vec![0.5, 1.0, -1.0]).unwrap());
        all.push(
            AffineSubspace::orthonormal_rows(
                LinearMap::row_sampling(9, vec![2, 3]).unwrap(),
                vec![1.0, 2.0],
            )
            .unwrap(),
        );
        for u in all {
            let bf = u.to_basis(100).unwrap();
            let n = u.dim();
            let via_basis = AffineSubspace::from_basis(bf.anchor.clone(), bf.basis.clone()).unwrap();
            for _ in 0..5 {
                let x = random::gaussian_vec(&mut rng, n);
                let a = u.project(&x).unwrap();
                let b = via_basis.project(&x).unwrap();
                assert!(dist(&a, &b) <= 1e-10 * (1.0 + norm(&x)));
            }
            assert!(u.residual(&bf.anchor).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            AffineSubspace::whole(10).to_basis(5),
            Err(Error::OracleCap { dim: 10, cap: 5 })
        ));
    }
}
