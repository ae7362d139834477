//! Image recovery from a subset of known pixels plus a subset of known DCT
//! coefficients: `minimize ½‖Ax − b‖²` over `U = {x : Cx = d}` with `A` a
//! pixel-sampling map and `C` rows of the orthonormal 2-D DCT. The problem is
//! underdetermined, so different starting points reach different solutions.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::operators::{dct2d_map, AffineSubspace, Dct2d, LinearMap};
use crate::problem::{AffineQuadraticProblem, Lip};
use crate::schedules::classical_fista;
use crate::solvers::{run_apg, CertifyFlags, RunConfig, SnapshotPolicy, StopReason, StopRule};
use crate::{random, vector};

/// Default stopping tolerance on `‖G(x_k)‖`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Smooth gradient, two rectangles and a sinusoidal texture, values in `[0, 1]`,
/// row-major `n × n`.
pub fn synthetic_image(n: usize) -> Vec<f64> {
    let s = (n.max(2) - 1) as f64;
    let mut img = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (y, x) = (i as f64 / s, j as f64 / s);
            let mut v = 0.15 + 0.35 * (x + y) / 2.0;
            if (0.15..0.45).contains(&x) && (0.2..0.6).contains(&y) {
                v += 0.3;
            }
            if (0.55..0.85).contains(&x) && (0.5..0.8).contains(&y) {
                v -= 0.1;
            }
            v += 0.08 * (2.0 * std::f64::consts::PI * 6.0 * x).sin() * (2.0 * std::f64::consts::PI * 4.0 * y).cos();
            img.push(v.clamp(0.0, 1.0));
        }
    }
    img
}

/// Which DCT coefficients are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreqPolicy {
    /// Seeded uniform subset.
    #[default]
    Random,
    /// Largest `i + j` first.
    High,
    /// Smallest `i + j` first.
    Low,
}

impl FromStr for FreqPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(FreqPolicy::Random),
            "high" => Ok(FreqPolicy::High),
            "low" => Ok(FreqPolicy::Low),
            _ => Err(Error::Parse(format!("unknown frequency policy {s:?} (random|high|low)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InstanceConfig {
    pub corruption: f64,
    /// Number of known pixels.
    pub p: usize,
    /// Number of known DCT coefficients.
    pub m: usize,
    pub seed: u64,
    pub freq_policy: FreqPolicy,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct InpaintInstance {
    pub n: usize,
    pub config: InstanceConfig,
    /// Corrupted pixels, sorted.
    pub corrupted: Vec<usize>,
    /// Known pixels `I`, sorted; disjoint from `corrupted`.
    pub known_pixels: Vec<usize>,
    /// `b = truth[I]`.
    pub b: Vec<f64>,
    /// Known DCT coefficients (row-major `i·n + j`), sorted.
    pub freq_indices: Vec<usize>,
    /// `d = (DCT truth)[freq_indices]`.
    pub d: Vec<f64>,
    pub truth: Vec<f64>,
    #[serde(skip)]
    problem: OnceLock<Arc<AffineQuadraticProblem>>,
}

pub fn make_instance(image: &[f64], cfg: InstanceConfig) -> Result<InpaintInstance> {
    let n = (image.len() as f64).sqrt().round() as usize;
    let total = n * n;
    if total != image.len() || n == 0 {
        return Err(Error::Precondition(format!("image of {} pixels is not square", image.len())));
    }
    if image.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Precondition("image values must lie in [0, 1]".into()));
    }
    if !(0.0..1.0).contains(&cfg.corruption) {
        return Err(Error::Precondition(format!("corruption fraction {} not in [0, 1)", cfg.corruption)));
    }
    let n_corrupt = (cfg.corruption * total as f64).round() as usize;
    if cfg.p > total - n_corrupt {
        return Err(Error::Precondition(format!(
            "p = {} exceeds the {} uncorrupted pixels",
            cfg.p,
            total - n_corrupt
        )));
    }
    if cfg.m > total {
        return Err(Error::Precondition(format!("m = {} exceeds n² = {total}", cfg.m)));
    }
    let mut rng = random::rng(cfg.seed);
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let mut corrupted = order[..n_corrupt].to_vec();
    let mut clean = order[n_corrupt..].to_vec();
    clean.shuffle(&mut rng);
    let mut known_pixels = clean[..cfg.p].to_vec();
    corrupted.sort_unstable();
    known_pixels.sort_unstable();

    let mut freq_indices: Vec<usize> = match cfg.freq_policy {
        FreqPolicy::Random => {
            let mut all: Vec<usize> = (0..total).collect();
            all.shuffle(&mut rng);
            all.truncate(cfg.m);
            all
        }
        FreqPolicy::High | FreqPolicy::Low => {
            let mut all: Vec<usize> = (0..total).collect();
            all.sort_by_key(|&k| (k / n + k % n, k));
            if cfg.freq_policy == FreqPolicy::High {
                all.reverse();
            }
            all.truncate(cfg.m);
            all
        }
    };
    freq_indices.sort_unstable();

    let coeffs = Dct2d::new(n).forward(image);
    Ok(InpaintInstance {
        n,
        config: cfg,
        b: known_pixels.iter().map(|&i| image[i]).collect(),
        d: freq_indices.iter().map(|&k| coeffs[k]).collect(),
        corrupted,
        known_pixels,
        freq_indices,
        truth: image.to_vec(),
        problem: OnceLock::new(),
    })
}

impl InpaintInstance {
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// The affine-quadratic problem, with `lip = 1` (`A*A` is a coordinate
    /// projection). Built once and shared.
    pub fn problem(&self) -> Result<Arc<AffineQuadraticProblem>> {
        if let Some(p) = self.problem.get() {
            return Ok(p.clone());
        }
        let total = self.dim();
        let a = LinearMap::row_sampling(total, self.known_pixels.clone())?;
        let c = LinearMap::orthonormal_rows(dct2d_map(self.n), self.freq_indices.clone())?;
        let u = AffineSubspace::orthonormal_rows(c, self.d.clone())?;
        let p = Arc::new(AffineQuadraticProblem::new(a, self.b.clone(), u, Lip::Value(1.0))?);
        Ok(self.problem.get_or_init(|| p).clone())
    }

    /// The truth with corrupted pixels set to zero.
    pub fn corrupted_image(&self) -> Vec<f64> {
        let mut img = self.truth.clone();
        for &i in &self.corrupted {
            img[i] = 0.0;
        }
        img
    }

    pub fn initial_point(&self, init: InitTag) -> Vec<f64> {
        let total = self.dim();
        match init {
            InitTag::Ones => vec![1.0; total],
            InitTag::Zeros => vec![0.0; total],
            InitTag::Random(seed) => random::uniform_vec(&mut random::rng(seed), total),
            InitTag::Truth => self.truth.clone(),
        }
    }
}

/// Starting point of a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitTag {
    Ones,
    Zeros,
    /// Uniform `[0, 1]` pixels from the given seed.
    Random(u64),
    Truth,
}

impl fmt::Display for InitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitTag::Ones => f.write_str("ones"),
            InitTag::Zeros => f.write_str("zeros"),
            InitTag::Random(s) => write!(f, "random:{s}"),
            InitTag::Truth => f.write_str("truth"),
        }
    }
}

impl InitTag {
    /// Parses `ones`, `zeros`, `truth`, `random` (seeded with `default_seed`)
    /// or `random:SEED`.
    pub fn parse(s: &str, default_seed: u64) -> Result<Self> {
        match s.trim() {
            "ones" => Ok(InitTag::Ones),
            "zeros" => Ok(InitTag::Zeros),
            "truth" => Ok(InitTag::Truth),
            "random" => Ok(InitTag::Random(default_seed)),
            t => t
                .strip_prefix("random:")
                .and_then(|v| v.parse().ok())
                .map(InitTag::Random)
                .ok_or_else(|| Error::Parse(format!("unknown init {t:?} (ones|zeros|truth|random[:SEED])"))),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Reconstruction {
    pub init_tag: InitTag,
    pub x_final: Vec<f64>,
    pub gradmap_final: f64,
    pub iters: usize,
    pub converged: bool,
    pub psnr: f64,
    /// `‖x_final − P_S x₀‖` when the oracle fits under the cap.
    pub dist_to_ps_x0: Option<f64>,
    /// `‖C x_final − d‖`.
    pub feasibility: f64,
    /// Largest `‖C x_k − d‖` over the checked iterates `k ≥ 1`.
    pub max_iterate_residual: f64,
}

/// PSNR against the truth with peak value 1.
pub fn psnr(x: &[f64], truth: &[f64]) -> f64 {
    let mse = vector::norm_sq(&vector::sub(x, truth)) / x.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// Classical FISTA from `init` until `‖G(x_k)‖ ≤ tol` or `max_iter`.
pub fn reconstruct(inst: &InpaintInstance, init: InitTag, tol: f64, max_iter: usize) -> Result<Reconstruction> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tol must be > 0, got {tol}")));
    }
    let p = inst.problem()?;
    let x0 = inst.initial_point(init);
    let cfg = RunConfig {
        stop: StopRule::gradmap(tol, max_iter),
        certify: CertifyFlags::default(),
        snapshots: SnapshotPolicy {
            dense_until: 0,
            stride: 0,
        },
        allow_inadmissible: false,
    };
    let trace = run_apg(&p, &x0, &classical_fista(), &cfg)?;
    let u = p.u();
    let feasibility = u.residual(&trace.x_final)?;
    let dist_to_ps_x0 = if inst.dim() <= crate::oracle_cap() {
        let s = p.solution_set()?;
        Some(vector::dist(&trace.x_final, &s.project(&x0)))
    } else {
        None
    };
    Ok(Reconstruction {
        init_tag: init,
        gradmap_final: trace.last().gradmap,
        iters: trace.iterations,
        converged: trace.stop == StopReason::GradientMapping,
        psnr: psnr(&trace.x_final, &inst.truth),
        dist_to_ps_x0,
        feasibility,
        max_iterate_residual: trace_residual(&trace, u)?,
        x_final: trace.x_final,
    })
}

fn trace_residual(trace: &crate::solvers::SolverTrace, u: &AffineSubspace) -> Result<f64> {
    let mut worst = 0.0f64;
    for (k, x) in &trace.snapshots {
        if *k >= 1 {
            worst = worst.max(u.residual(x)?);
        }
    }
    Ok(worst.max(u.residual(&trace.x_final)?))
}

/// Runs one reconstruction per init on its own thread. The oracle (if under
/// the cap) is computed once up front and shared.
pub fn reconstruct_all(
    inst: &InpaintInstance,
    inits: &[InitTag],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<Reconstruction>> {
    let p = inst.problem()?;
    if inst.dim() <= crate::oracle_cap() {
        p.solution_set()?;
    }
    let cap = crate::oracle_cap();
    std::thread::scope(|scope| {
        let handles: Vec<_> = inits
            .iter()
            .map(|&init| scope.spawn(move || crate::with_oracle_cap(cap, || reconstruct(inst, init, tol, max_iter))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("reconstruction thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(corruption: f64, p: usize, m: usize) -> InstanceConfig {
        InstanceConfig {
            corruption,
            p,
            m,
            seed: 7,
            freq_policy: FreqPolicy::Random,
        }
    }

    #[test]
    fn synthetic_image_in_range() {
        let img = synthetic_image(16);
        assert_eq!(img.len(), 256);
        assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(img, synthetic_image(16));
    }

    #[test]
    fn instance_counts_and_consistency() {
        let img = synthetic_image(16);
        let inst = make_instance(&img, cfg(0.4, 60, 40)).unwrap();
        assert_eq!(inst.known_pixels.len(), 60);
        assert_eq!(inst.corrupted.len(), 102);
        assert!(inst.known_pixels.windows(2).all(|w| w[0] < w[1]));
        assert!(inst.freq_indices.windows(2).all(|w| w[0] < w[1]));
        assert!(inst.known_pixels.iter().all(|i| inst.corrupted.binary_search(i).is_err()));
        let p = inst.problem().unwrap();
        assert!(p.f(&img).unwrap() < 1e-28);
        assert!(p.u().residual(&img).unwrap() < 1e-12);
    }

    #[test]
    fn infeasible_sizes_are_rejected() {
        let img = synthetic_image(8);
        assert!(make_instance(&img, cfg(0.5, 33, 4)).is_err());
        assert!(make_instance(&img, cfg(0.0, 4, 65)).is_err());
        assert!(make_instance(&img[..10], cfg(0.0, 1, 1)).is_err());
        assert!(make_instance(&vec![2.0; 64], cfg(0.0, 1, 1)).is_err());
    }

    #[test]
    fn frequency_policies() {
        let img = synthetic_image(8);
        let mut c = cfg(0.0, 4, 3);
        c.freq_policy = FreqPolicy::Low;
        assert_eq!(make_instance(&img, c).unwrap().freq_indices, vec![0, 1, 8]);
        c.freq_policy = FreqPolicy::High;
        assert_eq!(make_instance(&img, c).unwrap().freq_indices, vec![55, 62, 63]);
    }

    #[test]
    fn truth_init_stops_immediately() {
        let img = synthetic_image(8);
        let inst = make_instance(&img, cfg(0.0, 20, 10)).unwrap();
        let r = reconstruct(&inst, InitTag::Truth, 1e-10, 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.iters, 0);
    }

    #[test]
    fn full_dct_recovers_truth_in_one_step() {
        let img = synthetic_image(8);
        let inst = make_instance(&img, cfg(0.4, 10, 64)).unwrap();
        let r = reconstruct(&inst, InitTag::Zeros, 1e-10, 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.iters, 1);
        assert!(vector::dist(&r.x_final, &img) < 1e-12);
    }

    #[test]
    fn small_instance_reaches_own_projection() {
        let img = synthetic_image(8);
        let inst = make_instance(&img, cfg(0.4, 15, 16)).unwrap();
        let rs = reconstruct_all(&inst, &[InitTag::Ones, InitTag::Zeros, InitTag::Random(3)], 1e-11, 100_000).unwrap();
        for r in &rs {
            assert!(r.converged, "{}", r.init_tag);
            assert!(r.dist_to_ps_x0.unwrap() < 1e-6, "{:?}", r.dist_to_ps_x0);
            assert!(r.feasibility < 1e-8);
        }
        assert!(vector::dist(&rs[0].x_final, &rs[1].x_final) > 1e-3);
    }

    #[test]
    fn known_dc_merges_ones_and_zeros() {
        // ones − zeros is pure DC; once DC is known it lies in (par U)^⊥.
        let img = synthetic_image(8);
        let mut c = cfg(0.4, 15, 16);
        c.freq_policy = FreqPolicy::Low;
        let inst = make_instance(&img, c).unwrap();
        assert_eq!(inst.freq_indices[0], 0);
        let rs = reconstruct_all(&inst, &[InitTag::Ones, InitTag::Zeros], 1e-12, 100_000).unwrap();
        assert!(vector::dist(&rs[0].x_final, &rs[1].x_final) < 1e-9);
    }

    #[test]
    fn init_tags() {
        assert_eq!(InitTag::parse("random", 9).unwrap(), InitTag::Random(9));
        assert_eq!(InitTag::parse("random:4", 9).unwrap(), InitTag::Random(4));
        assert_eq!(InitTag::Random(4).to_string(), "random:4");
        assert!(InitTag::parse("half", 0).is_err());
    }
}
