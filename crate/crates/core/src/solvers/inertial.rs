/// A map iterated by the inertial scheme. Implementations must return a vector
/// of length [`FixedPointMap::dim`] for inputs of that length.
pub trait FixedPointMap {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

impl<F: Fn(&[f64]) -> Vec<f64>> FixedPointMap for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.1)(x)
    }
}

/// State of `x_{k+1} = T(y_k)`, `y_{k+1} = x_{k+1} + α_k(x_{k+1} − x_k)`,
/// started from `y_0 = x_0`. The inertial term `r_k = y_k − x_k`.
#[derive(Debug, Clone)]
pub struct InertialState {
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl InertialState {
    pub fn new(x0: &[f64]) -> Self {
        InertialState {
            k: 0,
            x: x0.to_vec(),
            y: x0.to_vec(),
        }
    }

    /// `r_k = y_k − x_k`.
    pub fn r(&self) -> Vec<f64> {
        self.y.iter().zip(&self.x).map(|(y, x)| y - x).collect()
    }

    /// Advances by one step with momentum `alpha = α_k`.
    pub fn step<M: FixedPointMap + ?Sized>(&mut self, map: &M, alpha: f64) {
        let next = map.eval(&self.y);
        let y = next
            .iter()
            .zip(&self.x)
            .map(|(n, x)| n + alpha * (n - x))
            .collect();
        self.x = next;
        self.y = y;
        self.k += 1;
    }
}

/// Runs `iters` inertial steps with `α_k = alpha(k)` and returns `(x_k, y_k)`
/// for `k = 0..=iters`.
pub fn inertial_trajectory<M: FixedPointMap + ?Sized>(
    map: &M,
    x0: &[f64],
    mut alpha: impl FnMut(usize) -> f64,
    iters: usize,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut s = InertialState::new(x0);
    let mut out = Vec::with_capacity(iters + 1);
    out.push((s.x.clone(), s.y.clone()));
    for k in 0..iters {
        s.step(map, alpha(k));
        out.push((s.x.clone(), s.y.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_momentum_is_plain_iteration() {
        let half = (1usize, |x: &[f64]| vec![x[0] / 2.0]);
        let tr = inertial_trajectory(&half, &[8.0], |_| 0.0, 3);
        let xs: Vec<f64> = tr.iter().map(|(x, _)| x[0]).collect();
        assert_eq!(xs, vec![8.0, 4.0, 2.0, 1.0]);
    }

    #[test]
    fn momentum_extrapolates() {
        let id = (1usize, |x: &[f64]| x.to_vec());
        let shift = (1usize, |x: &[f64]| vec![x[0] + 1.0]);
        let tr = inertial_trajectory(&shift, &[0.0], |_| 0.5, 2);
        // x1 = 1, y1 = 1.5, x2 = 2.5, y2 = 3.25.
        assert_eq!(tr[2].0, vec![2.5]);
        assert_eq!(tr[2].1, vec![3.25]);
        let fixed = inertial_trajectory(&id, &[3.0], |_| 0.9, 5);
        assert!(fixed.iter().all(|(x, y)| x[0] == 3.0 && y[0] == 3.0));
    }
}
