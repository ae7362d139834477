use std::collections::BTreeMap;
use std::path::PathBuf;

use apgkit::inpaint::{self, FreqPolicy, InitTag, InstanceConfig};
use apgkit::io::{self, DenseData};
use apgkit::{vector, Error};
use clap::Args;
use serde::Serialize;

use crate::output::{self, OutDir};
use crate::CliError;

#[derive(Debug, Args, Serialize)]
pub struct InpaintArgs {
    /// Use the built-in N×N synthetic image.
    #[arg(long, conflicts_with = "image")]
    pub synthetic: Option<usize>,
    /// Square grayscale image (PGM or other 8-bit format).
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Fraction of corrupted pixels.
    #[arg(long, default_value_t = 0.4)]
    pub corrupt: f64,
    /// Number of known pixels.
    #[arg(long, default_value_t = 2000)]
    pub p: usize,
    /// Number of known DCT coefficients.
    #[arg(long, default_value_t = 512)]
    pub m: usize,
    /// Comma list of ones, zeros, truth, random, random:SEED.
    #[arg(long, default_value = "ones,zeros,random")]
    pub inits: String,
    #[arg(long, default_value_t = inpaint::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// random | high | low
    #[arg(long, default_value = "random")]
    pub freq_policy: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct RunMetrics {
    init: String,
    iters: usize,
    converged: bool,
    gradmap_final: f64,
    psnr: f64,
    feasibility: f64,
    dist_to_ps_x0: Option<f64>,
}

#[derive(Serialize)]
struct Metrics {
    n: usize,
    p: usize,
    m: usize,
    corruption: f64,
    freq_policy: FreqPolicy,
    tol: f64,
    runs: Vec<RunMetrics>,
    /// `‖x_i − x_j‖` keyed by `init_i|init_j`.
    pairwise: BTreeMap<String, f64>,
}

pub fn run(args: InpaintArgs) -> Result<(), CliError> {
    let (n, image) = match (&args.synthetic, &args.image) {
        (Some(n), None) => (*n, inpaint::synthetic_image(*n)),
        (None, Some(path)) => {
            let (w, h, data) = io::read_image(path)?;
            if w != h {
                return Err(Error::Precondition(format!("image is {w}x{h}, expected square")).into());
            }
            (w, data)
        }
        _ => return Err(Error::Parse("give exactly one of --synthetic N or --image FILE".into()).into()),
    };
    let freq_policy: FreqPolicy = args.freq_policy.parse()?;
    let inits = args
        .inits
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| InitTag::parse(s, args.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = InstanceConfig {
        corruption: args.corrupt,
        p: args.p,
        m: args.m,
        seed: args.seed,
        freq_policy,
    };
    let inst = inpaint::make_instance(&image, cfg)?;
    let recs = inpaint::reconstruct_all(&inst, &inits, args.tol, args.max_iter)?;

    let header = output::header(&args, Some(args.seed));
    let out = OutDir::create(&args.out)?;
    io::write_pgm(out.writer("truth.pgm")?, n, n, &inst.truth, Some(&header))?;
    io::write_pgm(out.writer("corrupted.pgm")?, n, n, &inst.corrupted_image(), Some(&header))?;
    out.json("instance.json", &header, &inst)?;
    let mut runs = Vec::new();
    for r in &recs {
        let tag = r.init_tag.to_string().replace(':', "-");
        io::write_pgm(out.writer(&format!("recon_{tag}.pgm"))?, n, n, &r.x_final, Some(&header))?;
        let m = DenseData {
            rows: n,
            cols: n,
            data: r.x_final.clone(),
        };
        io::write_matrix_csv(out.writer(&format!("recon_{tag}.csv"))?, &m, Some(&header))?;
        runs.push(RunMetrics {
            init: r.init_tag.to_string(),
            iters: r.iters,
            converged: r.converged,
            gradmap_final: r.gradmap_final,
            psnr: r.psnr,
            feasibility: r.feasibility,
            dist_to_ps_x0: r.dist_to_ps_x0,
        });
    }
    let mut pairwise = BTreeMap::new();
    for (i, a) in recs.iter().enumerate() {
        for b in &recs[i + 1..] {
            pairwise.insert(
                format!("{}|{}", a.init_tag, b.init_tag),
                vector::dist(&a.x_final, &b.x_final),
            );
        }
    }
    let metrics = Metrics {
        n,
        p: args.p,
        m: args.m,
        corruption: args.corrupt,
        freq_policy,
        tol: args.tol,
        runs,
        pairwise,
    };
    out.json("metrics.json", &header, &metrics)?;
    let failed: Vec<String> = recs.iter().filter(|r| !r.converged).map(|r| r.init_tag.to_string()).collect();
    if !failed.is_empty() {
        return Err(CliError::NotConverged(format!(
            "reconstructions not converged: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}
