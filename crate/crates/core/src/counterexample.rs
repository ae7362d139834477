//! Exact reproduction of the cone/affine example: MAP (`p_{k+1} = P_U P_V p_k`)
//! and the inertial scheme with `α_k = k/(k+3)` applied to the line
//! `U = {x₁ + x₂ = 1}` and the cone `V = ℝ²₊` from `x₀ = (w, 0)`. MAP converges
//! to `p* = (1, 0)` while the inertial iterates settle at a different point of
//! `U ∩ V`.
//!
//! `T = P_U P_V` is not affine here, so nothing in this module goes through the
//! affine-quadratic machinery of [`crate::problem`].

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::solvers::{inertial_trajectory, FixedPointMap};

pub type Rat = BigRational;

/// A point of the plane with exact coordinates.
pub type Pair = [Rat; 2];

/// Longest trajectory computed in exact arithmetic.
pub const MAX_HORIZON: usize = 1000;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: usize) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `num/den` with an explicit denominator, also for integers.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or an integer.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

pub fn to_f64(r: &Rat) -> f64 {
    num::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// `P_U(a, b) = ½(a − b + 1, b − a + 1)`.
pub fn project_u(p: &Pair) -> Pair {
    let half = rat(1, 2);
    let one = Rat::one();
    [
        (&p[0] - &p[1] + &one) * &half,
        (&p[1] - &p[0] + &one) * &half,
    ]
}

/// `P_V` for `V = ℝ²₊`.
pub fn project_v(p: &Pair) -> Pair {
    [p[0].clone().max(Rat::zero()), p[1].clone().max(Rat::zero())]
}

fn in_u_and_v(p: &Pair) -> bool {
    &p[0] + &p[1] == Rat::one() && !p[0].is_negative() && !p[1].is_negative()
}

/// `α_k = k/(k+3)`, from `t_k = (k+2)/2`.
pub fn alpha(k: usize) -> Rat {
    Rat::new(BigInt::from(k), BigInt::from(k + 3))
}

/// `(P_U P_V)^k (w, 0) = (1 + (w−1)/2^k, −(w−1)/2^k)`.
pub fn map_closed_form(w: &Rat, k: usize) -> Result<Pair> {
    if *w < Rat::one() || k == 0 {
        return Err(Error::Precondition(format!("closed form needs w ≥ 1 and k ≥ 1, got w = {w}, k = {k}")));
    }
    let e = (w - Rat::one()) / Rat::from_integer(BigInt::from(2).pow(k as u32));
    Ok([Rat::one() + &e, -e])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeAffineState {
    pub k: usize,
    /// MAP iterate.
    pub p: Pair,
    pub x: Pair,
    pub y: Pair,
    /// `u_k`, the second coordinate of `x_k`.
    pub u: Rat,
    /// `d_k = u_k − u_{k−1}`, for `k ≥ 2` (both iterates in `U`).
    pub d: Option<Rat>,
}

/// Exact MAP and inertial trajectories for `k = 0..=horizon`.
pub fn apg_cone_iterate(w: &Rat, horizon: usize) -> Result<Vec<ConeAffineState>> {
    if *w < Rat::one() {
        return Err(Error::Precondition(format!("start abscissa must be ≥ 1, got {w}")));
    }
    if horizon > MAX_HORIZON {
        return Err(Error::Precondition(format!("horizon {horizon} exceeds {MAX_HORIZON}")));
    }
    let x0: Pair = [w.clone(), Rat::zero()];
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(ConeAffineState {
        k: 0,
        p: x0.clone(),
        x: x0.clone(),
        y: x0.clone(),
        u: Rat::zero(),
        d: None,
    });
    for k in 0..horizon {
        let prev = &out[k];
        let p = project_u(&project_v(&prev.p));
        let x = project_u(&project_v(&prev.y));
        let a = alpha(k);
        let y = [&x[0] + &a * (&x[0] - &prev.x[0]), &x[1] + &a * (&x[1] - &prev.x[1])];
        let u = x[1].clone();
        let d = (k >= 1).then(|| &u - &prev.u);
        out.push(ConeAffineState { k: k + 1, p, x, y, u, d });
    }
    Ok(out)
}

/// Limit of the inertial iterates, established from a finite prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// First index meeting the hypotheses.
    pub m: usize,
    pub d_m: Rat,
    /// `u* = u_M + ½(M − 1)d_M`.
    pub u_star: Rat,
    /// `x* = (1 − u*, u*)`.
    pub x_star: Pair,
    /// The iteration is already at rest at `M` (`y_M = x_M ∈ U ∩ V`).
    pub stationary: bool,
}

/// Finds the first `M ≥ 3` with `y_M ∈ U ∩ V`, `d_M > 0` and
/// `u* = u_M + ½(M−1)d_M ∈ (0, 1]`. From such an `M` on, `x_{k+1} = y_k` and
/// `d_{k+1} = ((k−1)/(k+2))d_k`, which sums to `u*`. A trajectory that has come
/// to rest in `U ∩ V` (`y_M = x_M`) is reported with `x* = x_M`.
pub fn detect_m_and_limit(states: &[ConeAffineState]) -> Result<Detection> {
    let horizon = states.len().saturating_sub(1);
    for s in states.iter().skip(3) {
        let Some(d) = &s.d else { continue };
        if !in_u_and_v(&s.y) {
            continue;
        }
        if d.is_zero() && s.y == s.x {
            return Ok(Detection {
                m: s.k,
                d_m: d.clone(),
                u_star: s.u.clone(),
                x_star: s.x.clone(),
                stationary: true,
            });
        }
        if !d.is_positive() {
            continue;
        }
        let u_star = &s.u + Rat::new(BigInt::from(s.k - 1), BigInt::from(2)) * d;
        if u_star.is_positive() && u_star <= Rat::one() {
            return Ok(Detection {
                m: s.k,
                d_m: d.clone(),
                x_star: [Rat::one() - &u_star, u_star.clone()],
                u_star,
                stationary: false,
            });
        }
    }
    Err(Error::Undetected { horizon })
}

/// Closed forms for `a_{k+1} = ((k−1)/(k+2))a_k` started at `a_M = a`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxValues {
    pub a_k: Rat,
    /// `Σ_{j=M}^{k} a_{j+1}`.
    pub partial_sum: Rat,
    /// `Σ_{j=k}^{∞} a_{j+1}`.
    pub tail_sum: Rat,
}

pub fn aux_sequence(a: &Rat, m: usize, k: usize) -> Result<AuxValues> {
    if m < 2 || k < m || !a.is_positive() || *a >= Rat::one() {
        return Err(Error::Precondition(format!(
            "aux sequence needs M ≥ 2, k ≥ M, a ∈ (0, 1); got M = {m}, k = {k}, a = {a}"
        )));
    }
    let (mm, kk) = (int(m), int(k));
    let one = Rat::one();
    let two = int(2);
    let mfac = (&mm - &one) * &mm * (&mm + &one);
    let a_k = a * &mfac / ((&kk - &one) * &kk * (&kk + &one));
    let partial_sum = a * (&mm - &one) / &two * (&one - &mm * (&mm + &one) / ((&kk + &one) * (&kk + &two)));
    let tail_sum = a * &mfac / (&two * &kk * (&kk + &one));
    Ok(AuxValues {
        a_k,
        partial_sum,
        tail_sum,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub w: Rat,
    /// MAP limit `(1, 0)`.
    pub p_star: Pair,
    pub detection: Detection,
    /// `‖x* − p*‖²`.
    pub separation_sq: Rat,
}

pub fn separation_certificate(w: &Rat, horizon: usize) -> Result<SeparationReport> {
    let states = apg_cone_iterate(w, horizon)?;
    let detection = detect_m_and_limit(&states)?;
    let p_star = [Rat::one(), Rat::zero()];
    let dx = &detection.x_star[0] - &p_star[0];
    let dy = &detection.x_star[1] - &p_star[1];
    Ok(SeparationReport {
        w: w.clone(),
        p_star,
        separation_sq: &dx * &dx + &dy * &dy,
        detection,
    })
}

/// `P_U P_V` in floating point.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConeAffineMap;

impl FixedPointMap for ConeAffineMap {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0].max(0.0), x[1].max(0.0));
        vec![(a - b + 1.0) / 2.0, (b - a + 1.0) / 2.0]
    }
}

/// Floating-point trajectories through the generic inertial iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatReplay {
    pub p: Vec<[f64; 2]>,
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
}

pub fn float_replay(w: f64, horizon: usize) -> FloatReplay {
    let pair = |v: &[f64]| [v[0], v[1]];
    let x0 = [w, 0.0];
    let map = inertial_trajectory(&ConeAffineMap, &x0, |_| 0.0, horizon);
    let apg = inertial_trajectory(&ConeAffineMap, &x0, |k| k as f64 / (k + 3) as f64, horizon);
    FloatReplay {
        p: map.iter().map(|(x, _)| pair(x)).collect(),
        x: apg.iter().map(|(x, _)| pair(x)).collect(),
        y: apg.iter().map(|(_, y)| pair(y)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: (i64, i64), b: (i64, i64)) -> Pair {
        [rat(a.0, a.1), rat(b.0, b.1)]
    }

    #[test]
    fn projections() {
        assert_eq!(project_u(&pair((5, 1), (0, 1))), pair((3, 1), (-2, 1)));
        assert_eq!(project_v(&pair((3, 1), (-2, 1))), pair((3, 1), (0, 1)));
    }

    #[test]
    fn map_closed_form_examples() {
        let w = rat(5, 1);
        assert_eq!(map_closed_form(&w, 1).unwrap(), pair((3, 1), (-2, 1)));
        assert_eq!(map_closed_form(&w, 3).unwrap(), pair((3, 2), (-1, 2)));
        assert_eq!(map_closed_form(&Rat::one(), 7).unwrap(), pair((1, 1), (0, 1)));
        assert!(map_closed_form(&rat(1, 2), 1).is_err());
        let states = apg_cone_iterate(&w, 60).unwrap();
        for s in &states[1..] {
            assert_eq!(s.p, map_closed_form(&w, s.k).unwrap());
        }
    }

    #[test]
    fn golden_trajectory() {
        let s = apg_cone_iterate(&rat(5, 1), 10).unwrap();
        assert_eq!(s[1].x, pair((3, 1), (-2, 1)));
        assert_eq!(s[2].x, pair((2, 1), (-1, 1)));
        assert_eq!(s[3].x, pair((11, 8), (-3, 8)));
        assert_eq!(s[4].x, pair((17, 16), (-1, 16)));
        assert_eq!(s[4].y, pair((29, 32), (3, 32)));
        assert_eq!(alpha(3), rat(1, 2));
        assert_eq!(s[10].u, rat(113, 352));
    }

    #[test]
    fn golden_detection() {
        let r = separation_certificate(&rat(5, 1), 20).unwrap();
        assert_eq!(r.detection.m, 4);
        assert_eq!(r.detection.d_m, rat(5, 16));
        assert_eq!(r.detection.u_star, rat(13, 32));
        assert_eq!(r.detection.x_star, pair((19, 32), (13, 32)));
        assert_eq!(r.p_star, pair((1, 1), (0, 1)));
        assert_eq!(r.separation_sq, rat(169, 512));
        assert!(!r.detection.stationary);
    }

    #[test]
    fn trivial_start() {
        let s = apg_cone_iterate(&Rat::one(), 30).unwrap();
        assert!(s.iter().all(|st| st.x == pair((1, 1), (0, 1)) && st.y == st.x));
        let r = separation_certificate(&Rat::one(), 30).unwrap();
        assert!(r.detection.stationary);
        assert!(r.separation_sq.is_zero());
    }

    #[test]
    fn closed_forms_after_m() {
        let s = apg_cone_iterate(&rat(5, 1), 1000).unwrap();
        let det = detect_m_and_limit(&s).unwrap();
        for st in &s[4..] {
            let k = st.k as i64;
            assert_eq!(st.d.clone().unwrap(), rat(75, 4 * (k - 1) * k * (k + 1)));
            assert_eq!(st.u, rat(13, 32) - rat(75, 8 * k * (k + 1)));
            assert!(&st.u + st.d.as_ref().unwrap() <= det.u_star);
        }
        for w in s.windows(2).skip(4) {
            let k = w[0].k;
            let ratio = Rat::new(BigInt::from(k - 1), BigInt::from(k + 2));
            assert_eq!(w[1].d.clone().unwrap(), ratio * w[0].d.clone().unwrap());
            assert!(w[1].u >= w[0].u);
        }
    }

    #[test]
    fn aux_examples() {
        let a = rat(5, 16);
        let v = aux_sequence(&a, 4, 4).unwrap();
        assert_eq!(v.a_k, a);
        assert_eq!(v.tail_sum, rat(15, 32));
        // Partial sums approach a(M−1)/2 = 15/32 and add up with the tails.
        let mut a_k = a.clone();
        let mut sum = Rat::zero();
        for k in 4..200usize {
            let v = aux_sequence(&a, 4, k).unwrap();
            assert_eq!(v.a_k, a_k);
            let next = &a_k * Rat::new(BigInt::from(k - 1), BigInt::from(k + 2));
            sum += &next;
            assert_eq!(v.partial_sum, sum);
            assert_eq!(&v.partial_sum + aux_sequence(&a, 4, k + 1).unwrap().tail_sum, rat(15, 32));
            if k >= 5 {
                // a_{k+1} ≤ Σ_{j≥k+1} a_{j+1}, with ratio 2/k.
                let tail = aux_sequence(&a, 4, k + 1).unwrap().tail_sum;
                assert_eq!(&next / &tail, rat(2, k as i64));
            }
            a_k = next;
        }
        assert!(aux_sequence(&a, 1, 4).is_err());
        assert!(aux_sequence(&rat(3, 2), 4, 4).is_err());
        assert!(aux_sequence(&a, 4, 3).is_err());
    }

    #[test]
    fn undetected_within_short_horizon() {
        let s = apg_cone_iterate(&rat(5, 1), 3).unwrap();
        assert!(matches!(detect_m_and_limit(&s), Err(Error::Undetected { horizon: 3 })));
    }

    #[test]
    fn float_replay_tracks_exact_trajectory() {
        let exact = apg_cone_iterate(&rat(5, 1), 100).unwrap();
        let fl = float_replay(5.0, 100);
        for (k, s) in exact.iter().enumerate() {
            for i in 0..2 {
                assert!((fl.x[k][i] - to_f64(&s.x[i])).abs() <= 1e-12);
                assert!((fl.y[k][i] - to_f64(&s.y[i])).abs() <= 1e-12);
                assert!((fl.p[k][i] - to_f64(&s.p[i])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(format_rat(&rat(-3, 8)), "-3/8");
        assert_eq!(format_rat(&rat(4, 2)), "2/1");
        assert_eq!(parse_rat("10/4").unwrap(), rat(5, 2));
        assert_eq!(parse_rat("7").unwrap(), rat(7, 1));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
