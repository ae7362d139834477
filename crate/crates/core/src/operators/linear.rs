use std::fmt;
use std::sync::Arc;

use faer::col::ColRef;
use faer::Mat;

use super::dct::Dct2d;
use crate::error::{Error, Result};
use crate::vector;

/// Structural tag of a [`LinearMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Dense,
    RowSampling,
    OrthonormalRows,
    Dct2d,
    Composition,
    ScaledSum,
    Adjoint,
}

#[derive(Clone)]
enum Repr {
    Dense(Arc<Mat<f64>>),
    RowSampling {
        total: usize,
        indices: Arc<[usize]>,
    },
    /// Selected rows of a square orthogonal `parent`.
    OrthonormalRows {
        parent: Box<LinearMap>,
        rows: Arc<[usize]>,
    },
    Dct2d(Arc<Dct2d>),
    /// `maps[0] ∘ maps[1] ∘ … ∘ maps[last]`
    Composition(Vec<LinearMap>),
    ScaledSum(Vec<(f64, LinearMap)>),
    Adjoint(Box<LinearMap>),
}

/// A matrix-free linear operator `ℝ^cols → ℝ^rows` together with its adjoint.
#[derive(Clone)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    repr: Repr,
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearMap")
            .field("kind", &self.kind())
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

fn check_indices(total: usize, indices: &[usize]) -> Result<()> {
    let mut seen = vec![false; total];
    for &i in indices {
        if i >= total {
            return Err(Error::InvalidOperator(format!(
                "index {i} out of range for dimension {total}"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidOperator(format!("duplicate index {i}")));
        }
    }
    Ok(())
}

/// Selects the coordinates `indices` of a length-`total` vector; the adjoint
/// scatters back with zeros elsewhere.
pub fn row_sampling_map(total: usize, indices: &[usize]) -> Result<LinearMap> {
    LinearMap::row_sampling(total, indices.to_vec())
}

impl LinearMap {
    pub fn dense(m: Mat<f64>) -> Self {
        LinearMap {
            rows: m.nrows(),
            cols: m.ncols(),
            repr: Repr::Dense(Arc::new(m)),
        }
    }

    /// Dense map from row-major data.
    pub fn dense_from_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim("dense matrix data", rows * cols, data.len()));
        }
        Ok(Self::dense(Mat::from_fn(rows, cols, |i, j| data[i * cols + j])))
    }

    pub fn row_sampling(total: usize, indices: Vec<usize>) -> Result<Self> {
        check_indices(total, &indices)?;
        Ok(LinearMap {
            rows: indices.len(),
            cols: total,
            repr: Repr::RowSampling {
                total,
                indices: indices.into(),
            },
        })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            rows: n,
            cols: n,
            repr: Repr::RowSampling {
                total: n,
                indices: (0..n).collect(),
            },
        }
    }

    /// Rows `rows` of the square orthogonal map `parent`. Orthogonality of the
    /// parent is probed on random vectors.
    pub fn orthonormal_rows(parent: LinearMap, rows: Vec<usize>) -> Result<Self> {
        if parent.rows != parent.cols {
            return Err(Error::InvalidOperator(format!(
                "orthonormal-rows parent must be square, got {}x{}",
                parent.rows, parent.cols
            )));
        }
        check_indices(parent.rows, &rows)?;
        let mut rng = crate::random::rng(0x0a7e);
        for _ in 0..3 {
            let y = crate::random::gaussian_vec(&mut rng, parent.rows);
            let back = parent.apply(&parent.adjoint_apply(&y)?)?;
            if vector::dist(&back, &y) > 1e-10 * vector::norm(&y) {
                return Err(Error::InvalidOperator(
                    "orthonormal-rows parent is not orthogonal".into(),
                ));
            }
        }
        Ok(LinearMap {
            rows: rows.len(),
            cols: parent.cols,
            repr: Repr::OrthonormalRows {
                parent: Box::new(parent),
                rows: rows.into(),
            },
        })
    }

    pub(crate) fn from_dct(dct: Dct2d) -> Self {
        let n2 = dct.n() * dct.n();
        LinearMap {
            rows: n2,
            cols: n2,
            repr: Repr::Dct2d(Arc::new(dct)),
        }
    }

    /// `maps[0] ∘ maps[1] ∘ … ∘ maps[last]`.
    pub fn compose(maps: Vec<LinearMap>) -> Result<Self> {
        let (first, last) = match (maps.first(), maps.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidOperator("empty composition".into())),
        };
        for pair in maps.windows(2) {
            if pair[0].cols != pair[1].rows {
                return Err(Error::dim("composition", pair[0].cols, pair[1].rows));
            }
        }
        Ok(LinearMap {
            rows: first.rows,
            cols: last.cols,
            repr: Repr::Composition(maps),
        })
    }

    /// `Σ coefᵢ · mapᵢ`.
    pub fn scaled_sum(terms: Vec<(f64, LinearMap)>) -> Result<Self> {
        let (rows, cols) = match terms.first() {
            Some((_, m)) => (m.rows, m.cols),
            None => return Err(Error::InvalidOperator("empty sum".into())),
        };
        for (_, m) in &terms {
            if m.rows != rows || m.cols != cols {
                return Err(Error::dim("scaled sum", rows * cols, m.rows * m.cols));
            }
        }
        Ok(LinearMap {
            rows,
            cols,
            repr: Repr::ScaledSum(terms),
        })
    }

    pub fn adjoint(&self) -> Self {
        match &self.repr {
            Repr::Adjoint(inner) => (**inner).clone(),
            _ => LinearMap {
                rows: self.cols,
                cols: self.rows,
                repr: Repr::Adjoint(Box::new(self.clone())),
            },
        }
    }

    /// `A*A` as a composition.
    pub fn normal(&self) -> Self {
        LinearMap {
            rows: self.cols,
            cols: self.cols,
            repr: Repr::Composition(vec![self.adjoint(), self.clone()]),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> MapKind {
        match &self.repr {
            Repr::Dense(_) => MapKind::Dense,
            Repr::RowSampling { .. } => MapKind::RowSampling,
            Repr::OrthonormalRows { .. } => MapKind::OrthonormalRows,
            Repr::Dct2d(_) => MapKind::Dct2d,
            Repr::Composition(_) => MapKind::Composition,
            Repr::ScaledSum(_) => MapKind::ScaledSum,
            Repr::Adjoint(_) => MapKind::Adjoint,
        }
    }

    /// Sampled coordinates when this is a row-sampling map.
    pub fn sampled_indices(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::RowSampling { indices, .. } => Some(indices),
            _ => None,
        }
    }

    /// `(parent, rows)` when this is an orthonormal-rows map.
    pub fn row_subset(&self) -> Option<(&LinearMap, &[usize])> {
        match &self.repr {
            Repr::OrthonormalRows { parent, rows } => Some((parent, rows)),
            _ => None,
        }
    }

    pub fn as_dense(&self) -> Option<&Mat<f64>> {
        match &self.repr {
            Repr::Dense(m) => Some(m),
            _ => None,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim("LinearMap::apply", self.cols, x.len()));
        }
        Ok(self.apply_unchecked(x))
    }

    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::dim("LinearMap::adjoint_apply", self.rows, y.len()));
        }
        Ok(self.adjoint_unchecked(y))
    }

    fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(m) => {
                let y = m.as_ref() * ColRef::from_slice(x);
                y.iter().copied().collect()
            }
            Repr::RowSampling { indices, .. } => indices.iter().map(|&i| x[i]).collect(),
            Repr::OrthonormalRows { parent, rows } => {
                let full = parent.apply_unchecked(x);
                rows.iter().map(|&i| full[i]).collect()
            }
            Repr::Dct2d(d) => d.forward(x),
            Repr::Composition(maps) => {
                let mut v = x.to_vec();
                for m in maps.iter().rev() {
                    v = m.apply_unchecked(&v);
                }
                v
            }
            Repr::ScaledSum(terms) => {
                let mut out = vec![0.0; self.rows];
                for (c, m) in terms {
                    vector::axpy(*c, &m.apply_unchecked(x), &mut out);
                }
                out
            }
            Repr::Adjoint(inner) => inner.adjoint_unchecked(x),
        }
    }

    fn adjoint_unchecked(&self, y: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(m) => {
                let x = m.as_ref().transpose() * ColRef::from_slice(y);
                x.iter().copied().collect()
            }
            Repr::RowSampling { total, indices } => {
                let mut out = vec![0.0; *total];
                for (&i, &v) in indices.iter().zip(y) {
                    out[i] = v;
                }
                out
            }
            Repr::OrthonormalRows { parent, rows } => {
                let mut full = vec![0.0; parent.rows];
                for (&i, &v) in rows.iter().zip(y) {
                    full[i] = v;
                }
                parent.adjoint_unchecked(&full)
            }
            Repr::Dct2d(d) => d.inverse(y),
            Repr::Composition(maps) => {
                let mut v = y.to_vec();
                for m in maps {
                    v = m.adjoint_unchecked(&v);
                }
                v
            }
            Repr::ScaledSum(terms) => {
                let mut out = vec![0.0; self.cols];
                for (c, m) in terms {
                    vector::axpy(*c, &m.adjoint_unchecked(y), &mut out);
                }
                out
            }
            Repr::Adjoint(inner) => inner.apply_unchecked(y),
        }
    }

    /// Explicit `rows × cols` matrix, by applying the map to unit vectors.
    pub fn to_dense(&self) -> Mat<f64> {
        if let Repr::Dense(m) = &self.repr {
            return (**m).clone();
        }
        let mut out = Mat::zeros(self.rows, self.cols);
        let mut e = vec![0.0; self.cols];
        for j in 0..self.cols {
            e[j] = 1.0;
            let col = self.apply_unchecked(&e);
            e[j] = 0.0;
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Largest `|⟨Ax, y⟩ − ⟨x, A*y⟩| / (1 + ‖x‖‖y‖)` over `trials` seeded
    /// Gaussian pairs.
    pub fn adjoint_mismatch(&self, trials: usize, seed: u64) -> f64 {
        let mut rng = crate::random::rng(seed);
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let x = crate::random::gaussian_vec(&mut rng, self.cols);
            let y = crate::random::gaussian_vec(&mut rng, self.rows);
            let lhs = vector::dot(&self.apply_unchecked(&x), &y);
            let rhs = vector::dot(&x, &self.adjoint_unchecked(&y));
            let rel = (lhs - rhs).abs() / (1.0 + vector::norm(&x) * vector::norm(&y));
            worst = worst.max(rel);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dct2d_map;
    use crate::random;

    #[test]
    fn row_sampling_examples() {
        let a = row_sampling_map(3, &[0, 2]).unwrap();
        assert_eq!(a.apply(&[7.0, 8.0, 9.0]).unwrap(), vec![7.0, 9.0]);
        assert_eq!(a.adjoint_apply(&[1.0, 2.0]).unwrap(), vec![1.0, 0.0, 2.0]);
        assert_eq!(a.kind(), MapKind::RowSampling);
    }

    #[test]
    fn row_sampling_rejects_bad_indices() {
        assert!(matches!(
            row_sampling_map(3, &[0, 0]),
            Err(Error::InvalidOperator(_))
        ));
        assert!(matches!(
            row_sampling_map(3, &[3]),
            Err(Error::InvalidOperator(_))
        ));
    }

    #[test]
    fn row_sampling_normal_is_mask_projection() {
        // Explicit dense matrix oracle at total = 16.
        let idx = [1usize, 4, 5, 9, 15];
        let a = row_sampling_map(16, &idx).unwrap();
        let mut dense = Mat::<f64>::zeros(idx.len(), 16);
        for (r, &c) in idx.iter().enumerate() {
            dense[(r, c)] = 1.0;
        }
        let ata = dense.transpose() * &dense;
        let mut rng = random::rng(3);
        for _ in 0..10 {
            let x = random::gaussian_vec(&mut rng, 16);
            let got = a.adjoint_apply(&a.apply(&x).unwrap()).unwrap();
            let want: Vec<f64> = (ata.as_ref() * ColRef::from_slice(&x))
                .iter()
                .copied()
                .collect();
            assert!(vector::dist(&got, &want) < 1e-15);
        }
    }

    #[test]
    fn dimension_discipline() {
        let a = LinearMap::dense(Mat::zeros(2, 3));
        assert!(matches!(a.apply(&[1.0, 2.0]), Err(Error::Dimension { .. })));
        assert!(matches!(
            a.adjoint_apply(&[1.0, 2.0, 3.0]),
            Err(Error::Dimension { .. })
        ));
        assert_eq!(a.apply(&[1.0, 2.0, 3.0]).unwrap().len(), 2);
    }

    #[test]
    fn every_kind_passes_adjoint_consistency() {
        let mut rng = random::rng(5);
        let dense = LinearMap::dense(random::gaussian_mat(&mut rng, 7, 16));
        let samp = row_sampling_map(16, &[0, 3, 8, 12]).unwrap();
        let dct = dct2d_map(4);
        let rows = LinearMap::orthonormal_rows(dct.clone(), vec![0, 5, 6]).unwrap();
        let comp = LinearMap::compose(vec![dense.clone(), dct.clone()]).unwrap();
        let sum = LinearMap::scaled_sum(vec![
            (1.0, LinearMap::identity(16)),
            (-0.3, dense.normal()),
        ])
        .unwrap();
        let adj = dense.adjoint();
        for (name, m) in [
            ("dense", dense),
            ("row-sampling", samp),
            ("dct", dct),
            ("orthonormal-rows", rows),
            ("composition", comp),
            ("scaled-sum", sum),
            ("adjoint", adj),
        ] {
            let mis = m.adjoint_mismatch(20, 99);
            assert!(mis <= 1e-10, "{name}: {mis}");
        }
    }

    #[test]
    fn compose_checks_dimensions() {
        let a = LinearMap::dense(Mat::zeros(2, 3));
        let b = LinearMap::dense(Mat::zeros(4, 5));
        assert!(LinearMap::compose(vec![a, b]).is_err());
    }

    #[test]
    fn to_dense_matches_apply() {
        let m = LinearMap::orthonormal_rows(dct2d_map(3), vec![1, 2]).unwrap();
        let d = m.to_dense();
        let x = [1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 2.0, -1.0, 0.25];
        let want = m.apply(&x).unwrap();
        let got: Vec<f64> = (d.as_ref() * ColRef::from_slice(&x)).iter().copied().collect();
        assert!(vector::dist(&got, &want) < 1e-14);
    }
}
