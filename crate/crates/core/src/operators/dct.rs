use std::f64::consts::PI;

use super::LinearMap;

/// Orthonormal 1-D DCT-II matrix, row-major: entry `(k, i)` is
/// `s_k cos(π (2i + 1) k / 2n)` with `s_0 = √(1/n)` and `s_k = √(2/n)` otherwise.
pub fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let nf = n as f64;
    for k in 0..n {
        let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            m[k * n + i] = s * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos();
        }
    }
    m
}

/// Separable orthonormal 2-D DCT-II on `n × n` images flattened row-major.
/// `forward` is `Q ⊗ Q`; `inverse` is its transpose.
#[derive(Debug, Clone)]
pub struct Dct2d {
    n: usize,
    basis: Vec<f64>,
}

impl Dct2d {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "DCT size must be positive");
        Dct2d {
            n,
            basis: dct_matrix(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.separable(x, false)
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        self.separable(y, true)
    }

    // Rows first, then columns. With `transpose` the 1-D matrix is replaced by
    // its transpose in both passes.
    fn separable(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(x.len(), n * n);
        let coef = |k: usize, i: usize| {
            if transpose {
                self.basis[i * n + k]
            } else {
                self.basis[k * n + i]
            }
        };
        let mut tmp = vec![0.0; n * n];
        for r in 0..n {
            let row = &x[r * n..(r + 1) * n];
            let out = &mut tmp[r * n..(r + 1) * n];
            for (k, o) in out.iter_mut().enumerate() {
                *o = row.iter().enumerate().map(|(i, v)| coef(k, i) * v).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            let dst = &mut out[k * n..(k + 1) * n];
            for r in 0..n {
                let c = coef(k, r);
                if c == 0.0 {
                    continue;
                }
                for (d, s) in dst.iter_mut().zip(&tmp[r * n..(r + 1) * n]) {
                    *d += c * s;
                }
            }
        }
        out
    }
}

/// The orthonormal 2-D DCT-II on `n × n` images as a [`LinearMap`].
pub fn dct2d_map(n: usize) -> LinearMap {
    LinearMap::from_dct(Dct2d::new(n))
}
