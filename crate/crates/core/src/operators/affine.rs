use super::LinearMap;
use crate::error::{Error, Result};

/// `x ↦ offset + linear(x)` with a square linear part.
#[derive(Debug, Clone)]
pub struct AffineMap {
    linear: LinearMap,
    offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(linear: LinearMap, offset: Vec<f64>) -> Result<Self> {
        if linear.rows() != linear.cols() {
            return Err(Error::InvalidOperator(format!(
                "affine map needs a square linear part, got {}x{}",
                linear.rows(),
                linear.cols()
            )));
        }
        if offset.len() != linear.rows() {
            return Err(Error::dim("AffineMap offset", linear.rows(), offset.len()));
        }
        Ok(AffineMap { linear, offset })
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn linear(&self) -> &LinearMap {
        &self.linear
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.linear.apply(x)?;
        for (yi, oi) in y.iter_mut().zip(&self.offset) {
            *yi = oi + *yi;
        }
        Ok(y)
    }
}

impl crate::solvers::FixedPointMap for AffineMap {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.value(x).expect("dimension checked by the solver")
    }
}
