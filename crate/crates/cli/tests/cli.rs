use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dioph").chain(args.iter().copied());
    let code = dioph_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn count_ball_radius_two() {
    let v = json(&["lattice", "count-ball", "-d", "2", "-R", "2"]);
    assert_eq!(v["count"], 13);
    assert_eq!(v["saturated"], false);
    assert_eq!(v["config"]["lattice"]["count-ball"]["radius"], 2.0);
}

#[test]
fn rdn_three_one() {
    assert_eq!(json(&["nt", "rdn", "-d", "3", "-n", "1"])["count"], 6);
    let (code, csv, _) = run(&["nt", "rdn", "-d", "2", "--upto", "5"]);
    assert_eq!(code, 0);
    assert_eq!(csv, "n,count\n0,1\n1,4\n2,4\n3,0\n4,4\n5,8\n");
}

#[test]
fn selftest_passes_both_spellings() {
    for args in [&["selftest"][..], &["--selftest"][..]] {
        let (code, out, _) = run(args);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["failed"], 0);
        assert!(v["passed"].as_u64().unwrap() >= 10);
    }
}

#[test]
fn argument_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["lattice", "count-ball", "-d", "2"]).0, 2);
    assert_eq!(run(&["lattice", "count-ball", "-d", "0", "-R", "2"]).0, 2);
    assert_eq!(run(&["cutoff", "deriv", "--oracle", "1,1,63", "--x0", "1.5,1.5", "--r", "1.2"]).0, 2);
    assert_eq!(run(&["nt", "zeta", "-d", "2", "-s", "1", "-N", "10"]).0, 2);
    assert_eq!(run(&["bounds", "fdelta-scaling", "--symbol", "wave", "--delta", "0.2", "--lambdas", "10,100"]).0, 2);
}

#[test]
fn missing_input_file_exits_three() {
    let (code, _, err) = run(&["bounds", "fit", "--csv", "/nonexistent/ratios.csv"]);
    assert_eq!(code, 3);
    assert!(err.contains("error"));
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("lattice"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dioph");
    let ok = Command::new(bin).args(["lattice", "count-ball", "-d", "2", "-R", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["count"], 13);
    let bad = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Usage"));
}

#[test]
fn inline_symbol_and_fdelta_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sols.csv");
    let v = json(&[
        "lattice", "fdelta", "--symbol", "2 0 1 0;0 2 1 0", "--lambda", "25", "--delta", "0.4",
        "--solutions", csv.to_str().unwrap(),
    ]);
    let count = v["count"].as_u64().unwrap();
    assert!(v["complete"].as_bool().unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count() as u64, count + 1);
    assert!(text.starts_with("xi1,xi2\n"));
}

#[test]
fn timing_goes_to_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let timing = dir.path().join("t.json");
    let out = dir.path().join("o.json");
    let (code, stdout, _) = run(&[
        "nt", "rdn", "-d", "3", "-n", "1", "--timing", timing.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&timing).unwrap()).unwrap();
    assert!(t["elapsed_ms"].as_f64().unwrap() >= 0.0);
    let o: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(o["count"], 6);
    assert!(o.get("elapsed_ms").is_none());
}

#[test]
fn mask_solve_ratio_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (mask, pairs, ratios) = (p("sq.pgm"), p("pairs.bin"), p("ratios.csv"));
    let m = json(&["eigen", "make-mask", "--shape", "square", "-N", "63", "--mask", &mask]);
    assert_eq!(m["interior"], 63 * 63);
    assert!(std::path::Path::new(&format!("{mask}.json")).exists());

    let (code, stdout, err) = run(&["eigen", "solve", "--mask", &mask, "-k", "4", "--window", "0,20", "--out", &pairs]);
    assert_eq!(code, 0, "{err}");
    let s: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(s["count"], 4);
    let lowest = s["eigenvalues"][0]["re"].as_f64().unwrap();
    assert!((lowest - 2.0).abs() < 0.01, "{lowest}");

    let (code, csv, err) = run(&["bounds", "ratios", "--pairs", &pairs, "--mask", &mask, "--r", "0.3"]);
    assert_eq!(code, 0, "{err}");
    std::fs::write(&ratios, &csv).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let first_ratio: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first_ratio - 2.0 / std::f64::consts::PI).abs() < 2e-3, "{first_ratio}");

    // Four points spanning well under a decade: the fit must refuse by default
    // and succeed once the span requirement is lowered.
    assert_eq!(run(&["bounds", "fit", "--csv", &ratios]).0, 2);
    let f = json(&["bounds", "fit", "--csv", &ratios, "--min-decades", "0.1"]);
    assert_eq!(f["n"], 4);

    let v = json(&["cutoff", "verify", "--pairs", &pairs, "--mask", &mask, "--x0", "1.5,1.5", "--r", "0.4"]);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r["partI_count"], r["fdelta_count"]);
    }
}

#[test]
fn oracle_deriv_and_verify() {
    let v = json(&["cutoff", "deriv", "--oracle", "3,4,127", "--x0", "1.5,1.5", "--r", "0.4"]);
    let r = &v["reports"][0];
    assert!(r["bound"].as_f64().unwrap() >= r["sampled_sup"].as_f64().unwrap());
    let v = json(&["cutoff", "verify", "--oracle", "5,5,255", "--x0", "1.5707963267948966,1.5707963267948966"]);
    let r = &v["reports"][0];
    assert_eq!(r["alpha"], 6);
    assert_eq!(r["partI_count"], r["fdelta_count"]);
}

#[test]
fn fdelta_scaling_grid() {
    let v = json(&["bounds", "fdelta-scaling", "-d", "1", "--delta", "0.5", "--grid", "10,10000,4"]);
    assert_eq!(v["points"].as_array().unwrap().len(), 4);
    assert!(v["fit"]["slope"].as_f64().unwrap().abs() < 0.3);
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let args = ["nt", "hardy", "-d", "5", "--upto", "12", "-K", "64"];
    let base = run(&args).1;
    for w in ["2", "8"] {
        let mut a = vec!["--workers", w];
        a.extend(args);
        assert_eq!(run(&a).1, base);
    }
}
