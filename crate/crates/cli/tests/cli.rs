use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn apgkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apgkit"))
        .args(args)
        .env_remove("APGKIT_ORACLE_CAP")
        .output()
        .expect("spawn apgkit")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("error JSON on stderr");
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn final_point(dir: &Path) -> Vec<f64> {
    let f = std::fs::File::open(dir.join("final.bin")).unwrap();
    apgkit::io::read_matrix_bin(f).unwrap().data
}

fn write_line_problem(dir: &Path, a: &str, normal: &str) -> String {
    std::fs::write(dir.join("A.csv"), format!("{a}\n")).unwrap();
    let desc = format!(
        r#"{{"A": {{"kind": "dense", "file": "A.csv"}}, "b": {{"values": [0]}},
            "U": {{"representation": "hyperplane", "normal": {{"values": {normal}}}, "offset": 0}},
            "lip": "auto"}}"#
    );
    let path = dir.join("problem.json");
    std::fs::write(&path, desc).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_fista_converges_without_violations() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = apgkit(&[
        "solve", "--random", "20", "10", "--seed", "3", "--certify", "all", "--tol", "1e-9",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["converged"], true);
    for (name, counts) in s["violations"].as_object().unwrap() {
        assert_eq!(counts["hard"], 0, "{name}");
    }
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let header = trace.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "iter,F,gap,xi,dist_S,gradmap,bound_rate,bound_xi,bound_ball");
}

#[test]
fn pgm_and_fista_share_the_limit() {
    let tmp = TempDir::new().unwrap();
    let run = |extra: &[&str], name: &str| {
        let out = tmp.path().join(name);
        let mut args = vec!["solve", "--random", "15", "8", "--seed", "5", "--tol", "1e-11"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", out.to_str().unwrap()]);
        let o = apgkit(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        final_point(&out)
    };
    let apg = run(&[], "apg");
    let pgm = run(&["--pgm"], "pgm");
    let d = apg.iter().zip(&pgm).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(d <= 1e-6, "limits differ by {d}");
}

#[test]
fn inadmissible_custom_schedule_exits_2() {
    let tmp = TempDir::new().unwrap();
    let sched = tmp.path().join("bad.csv");
    std::fs::write(&sched, "t\n1\n5\n50\n500\n").unwrap();
    let spec = format!("custom:{}", sched.display());
    let o = apgkit(&["solve", "--random", "10", "5", "--schedule", &spec, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_kind(&o), "schedule");
}

#[test]
fn unconverged_solve_exits_5() {
    let tmp = TempDir::new().unwrap();
    let o = apgkit(&[
        "solve", "--random", "20", "10", "--tol", "1e-14", "--max-iter", "5", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn counterexample_golden_values() {
    let tmp = TempDir::new().unwrap();
    let o = apgkit(&["counterexample", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = json(&tmp.path().join("limits.json"));
    assert_eq!(l["m"], 4);
    assert_eq!(l["d_m"], "5/16");
    assert_eq!(l["u_star"], "13/32");
    assert_eq!(l["x_star"][0], "19/32");
    assert_eq!(l["x_star"][1], "13/32");
    assert!(l["golden"].as_array().unwrap().iter().all(|g| g["ok"] == true));
}

#[test]
fn counterexample_short_horizon_exits_3() {
    let tmp = TempDir::new().unwrap();
    let o = apgkit(&["counterexample", "--horizon", "3", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn counterexample_w_one_is_stationary() {
    let tmp = TempDir::new().unwrap();
    let o = apgkit(&["counterexample", "--w", "1", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = json(&tmp.path().join("limits.json"));
    assert_eq!(l["stationary"], true);
    assert_eq!(l["separation_sq"], "0/1");
}

#[test]
fn inpaint_limits_depend_on_initialization() {
    let tmp = TempDir::new().unwrap();
    let o = apgkit(&[
        "inpaint", "--synthetic", "16", "--p", "100", "--m", "40", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&tmp.path().join("metrics.json"));
    for run in m["runs"].as_array().unwrap() {
        assert_eq!(run["converged"], true);
        assert!(run["dist_to_ps_x0"].as_f64().unwrap() <= 1e-6);
    }
    for (pair, d) in m["pairwise"].as_object().unwrap() {
        assert!(d.as_f64().unwrap() > 1e-3, "{pair}");
    }
    for f in ["truth.pgm", "corrupted.pgm", "recon_ones.pgm", "recon_random-1.csv"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn inpaint_truth_init_and_full_spectrum() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("truth");
    let o = apgkit(&[
        "inpaint", "--synthetic", "16", "--corrupt", "0", "--p", "100", "--m", "40", "--inits", "truth",
        "--out", a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&a.join("metrics.json"))["runs"][0]["iters"], 0);

    let b = tmp.path().join("full");
    let o = apgkit(&[
        "inpaint", "--synthetic", "16", "--p", "100", "--m", "256", "--inits", "zeros", "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = &json(&b.join("metrics.json"))["runs"][0];
    assert_eq!(run["iters"], 1);
    assert!(run["psnr"].as_f64().unwrap() > 100.0);
}

#[test]
fn inpaint_too_many_known_pixels_exits_2() {
    let tmp = TempDir::new().unwrap();
    let o = apgkit(&["inpaint", "--synthetic", "8", "--p", "65", "--m", "4", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn diagnose_friedrichs_examples() {
    let cases = [
        ("0,1", "[0, 1]", 0.0),
        ("1,-1", "[1, -1]", 0.0),
        ("1,-1", "[0, 1]", std::f64::consts::FRAC_1_SQRT_2),
    ];
    for (a, normal, want) in cases {
        let tmp = TempDir::new().unwrap();
        let p = write_line_problem(tmp.path(), a, normal);
        let o = apgkit(&["diagnose", "--problem", &p]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        let cos = v["friedrichs_cos"].as_f64().unwrap();
        assert!((cos - want).abs() <= 1e-10, "A={a} normal={normal}: {cos}");
        assert_eq!(v["error_bound"]["violations"], 0);
    }
}

#[test]
fn diagnose_over_oracle_cap_exits_4() {
    let o = Command::new(env!("CARGO_BIN_EXE_apgkit"))
        .args(["diagnose", "--random", "20", "10"])
        .env("APGKIT_ORACLE_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_kind(&o), "oracle-cap");
}

#[test]
fn outputs_are_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    let files: [(&[&str], &[&str]); 3] = [
        (&["solve", "--random", "12", "6", "--seed", "9", "--certify", "all", "--max-iter", "300"], &[
            "trace.csv",
            "summary.json",
            "final.bin",
        ]),
        (&["counterexample", "--horizon", "40"], &["exact.csv", "float.csv", "limits.json"]),
        (&["inpaint", "--synthetic", "12", "--p", "60", "--m", "30", "--max-iter", "400"], &[
            "metrics.json",
            "recon_random-1.csv",
            "recon_ones.pgm",
        ]),
    ];
    for (i, (args, outputs)) in files.iter().enumerate() {
        let dirs: Vec<_> = ["a", "b"].iter().map(|d| tmp.path().join(format!("{i}{d}"))).collect();
        for d in &dirs {
            let mut full = args.to_vec();
            full.extend_from_slice(&["--out", d.to_str().unwrap()]);
            let o = apgkit(&full);
            assert!(matches!(o.status.code(), Some(0) | Some(5)), "{}", String::from_utf8_lossy(&o.stderr));
        }
        for f in *outputs {
            let x = std::fs::read(dirs[0].join(f)).unwrap();
            let y = std::fs::read(dirs[1].join(f)).unwrap();
            assert!(x == y, "{f} differs between identical runs");
        }
    }
}
