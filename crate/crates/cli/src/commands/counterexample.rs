use std::io::Write;
use std::path::PathBuf;

use apgkit::counterexample::{self as ce, format_rat, parse_rat, to_f64, Pair, Rat};
use apgkit::Error;
use clap::Args;
use serde::Serialize;

use crate::output::{self, OutDir};
use crate::CliError;

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    /// Start abscissa `w` of `x₀ = (w, 0)`, as NUM/DEN or an integer.
    #[arg(long, default_value = "5/1")]
    pub w: String,
    /// Number of exact iterations.
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Limits {
    w: String,
    horizon: usize,
    m: usize,
    d_m: String,
    u_star: String,
    x_star: [String; 2],
    p_star: [String; 2],
    separation_sq: String,
    stationary: bool,
    x_star_f64: [f64; 2],
    separation_f64: f64,
    /// Present for `w = 5`: each expected value and whether it was reproduced.
    golden: Option<Vec<GoldenCheck>>,
}

#[derive(Serialize)]
struct GoldenCheck {
    name: &'static str,
    expected: String,
    got: String,
    ok: bool,
}

fn pair_str(p: &Pair) -> [String; 2] {
    [format_rat(&p[0]), format_rat(&p[1])]
}

fn golden(states: &[ce::ConeAffineState], r: &ce::SeparationReport) -> Vec<GoldenCheck> {
    let q = ce::rat;
    let mut out = Vec::new();
    let mut pair = |name, want: Pair, got: Option<&Pair>| {
        let got_s = got.map(|g| pair_str(g).join(",")).unwrap_or_else(|| "missing".into());
        out.push(GoldenCheck {
            name,
            expected: pair_str(&want).join(","),
            ok: got == Some(&want),
            got: got_s,
        });
    };
    let x = |k: usize| states.get(k).map(|s| &s.x);
    pair("x1", [q(3, 1), q(-2, 1)], x(1));
    pair("x2", [q(2, 1), q(-1, 1)], x(2));
    pair("x3", [q(11, 8), q(-3, 8)], x(3));
    pair("x4", [q(17, 16), q(-1, 16)], x(4));
    pair("y4", [q(29, 32), q(3, 32)], states.get(4).map(|s| &s.y));
    pair("x_star", [q(19, 32), q(13, 32)], Some(&r.detection.x_star));
    pair("p_star", [q(1, 1), q(0, 1)], Some(&r.p_star));
    let mut scalar = |name, want: Rat, got: &Rat| {
        out.push(GoldenCheck {
            name,
            expected: format_rat(&want),
            got: format_rat(got),
            ok: &want == got,
        })
    };
    scalar("M", q(4, 1), &Rat::from_integer(r.detection.m.into()));
    scalar("d_M", q(5, 16), &r.detection.d_m);
    scalar("u_star", q(13, 32), &r.detection.u_star);
    scalar("separation_sq", q(169, 512), &r.separation_sq);
    if let Some(s) = states.get(10) {
        scalar("u_10", q(113, 352), &s.u);
    }
    out
}

pub fn run(args: CounterexampleArgs) -> Result<(), CliError> {
    let w = parse_rat(&args.w)?;
    let states = ce::apg_cone_iterate(&w, args.horizon)?;
    let header = output::header(&args, None);
    let out = OutDir::create(&args.out)?;

    let mut exact = out.writer("exact.csv")?;
    let mut text = header.comment_lines("#");
    text.push_str("k,x1,x2,y1,y2,p1,p2\n");
    for s in &states {
        let f = |p: &Pair| pair_str(p).join(",");
        text.push_str(&format!("{},{},{},{}\n", s.k, f(&s.x), f(&s.y), f(&s.p)));
    }
    exact.write_all(text.as_bytes()).map_err(Error::from)?;
    exact.flush().map_err(Error::from)?;

    let replay = ce::float_replay(to_f64(&w), args.horizon);
    let mut text = header.comment_lines("#");
    text.push_str("k,x1,x2,y1,y2,p1,p2,x1_exact,x2_exact,p1_exact,p2_exact\n");
    for (k, s) in states.iter().enumerate() {
        text.push_str(&format!(
            "{k},{},{},{},{},{},{},{},{},{},{}\n",
            replay.x[k][0],
            replay.x[k][1],
            replay.y[k][0],
            replay.y[k][1],
            replay.p[k][0],
            replay.p[k][1],
            to_f64(&s.x[0]),
            to_f64(&s.x[1]),
            to_f64(&s.p[0]),
            to_f64(&s.p[1])
        ));
    }
    let mut fw = out.writer("float.csv")?;
    fw.write_all(text.as_bytes()).map_err(Error::from)?;
    fw.flush().map_err(Error::from)?;

    let det = ce::detect_m_and_limit(&states)?;
    let p_star = [Rat::from_integer(1.into()), Rat::from_integer(0.into())];
    let dx = &det.x_star[0] - &p_star[0];
    let dy = &det.x_star[1] - &p_star[1];
    let report = ce::SeparationReport {
        w: w.clone(),
        p_star,
        separation_sq: &dx * &dx + &dy * &dy,
        detection: det,
    };
    let golden = (w == ce::rat(5, 1)).then(|| golden(&states, &report));
    let limits = Limits {
        w: format_rat(&w),
        horizon: args.horizon,
        m: report.detection.m,
        d_m: format_rat(&report.detection.d_m),
        u_star: format_rat(&report.detection.u_star),
        x_star: pair_str(&report.detection.x_star),
        p_star: pair_str(&report.p_star),
        separation_sq: format_rat(&report.separation_sq),
        stationary: report.detection.stationary,
        x_star_f64: [to_f64(&report.detection.x_star[0]), to_f64(&report.detection.x_star[1])],
        separation_f64: to_f64(&report.separation_sq).sqrt(),
        golden,
    };
    out.json("limits.json", &header, &limits)?;
    if let Some(g) = &limits.golden {
        let bad: Vec<&str> = g.iter().filter(|c| !c.ok).map(|c| c.name).collect();
        if !bad.is_empty() {
            return Err(CliError::Golden(format!("values not reproduced: {}", bad.join(", "))));
        }
    }
    Ok(())
}
