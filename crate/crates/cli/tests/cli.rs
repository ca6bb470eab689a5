use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn weyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl"))
        .args(args)
        .env_remove("WEYL_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn hlawka_on_the_grid() {
    let out = weyl(&["verify", "hlawka", "--gen", "grid", "--N", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    let c = &r["empirical_constants"];
    assert!((c["lhs"].as_f64().unwrap() - 101.0).abs() < 1e-9);
    assert_eq!(c["rhs_squared_form"].as_f64().unwrap(), 10201.0);
}

#[test]
fn verify_commands_pass() {
    for args in [
        &["verify", "vdc-limits", "--s-max", "18"][..],
        &["verify", "kronecker-sandwich", "--alpha", "sqrt2m1", "--q-max", "100000"],
        &["verify", "ostrowski", "--N", "2000"],
        &["verify", "cesaro", "--N", "2000"],
        &["verify", "type-growth", "--alpha", "golden", "--t", "1.01", "--N", "2000"],
        &["verify", "hlawka", "--gen", "vdc", "--N", "1000"],
    ] {
        let out = weyl(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(json(&out)["passed"], true, "{args:?}");
    }
}

#[test]
fn conjectures_always_exit_zero() {
    let out = weyl(&["verify", "conjectures", "--N", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["evidence_only"], true);
    assert_eq!(r["evidence"]["argmax_all_match"], true);
    let small = weyl(&["verify", "conjectures", "--N", "3"]);
    assert_eq!(small.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(weyl(&["verify", "riemann"]).status.code(), Some(2));
    assert_eq!(weyl(&["mc", "iid", "--paths", "0"]).status.code(), Some(2));
    assert_eq!(weyl(&["mc", "brownian"]).status.code(), Some(2));
    assert_eq!(weyl(&["points", "--alpha", "sqrt(4)"]).status.code(), Some(2));
    assert_eq!(weyl(&["extremal", "--N", "10", "--d", "1/4"]).status.code(), Some(2));
    let out = weyl(&["figure", "--out", "/nonexistent/dir/f.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precision_comes_from_the_environment() {
    let low = Command::new(env!("CARGO_BIN_EXE_weyl"))
        .args(["points", "--N", "1000"])
        .env("WEYL_PRECISION_BITS", "64")
        .output()
        .unwrap();
    assert_eq!(low.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_weyl"))
        .args(["points", "--N", "1000"])
        .env("WEYL_PRECISION_BITS", "96")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn figure_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = weyl(&["figure", "--alpha", "sqrt2m1", "--N-max", "500", "--normalizer", "none", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_series(&path);
    assert_eq!(rows.len(), 500);
    // the largest value within each octave between denominators
    let qs = [2usize, 5, 12, 29, 70, 169, 408, 985];
    for w in qs.windows(2) {
        let hi = w[1].min(501);
        let arg = (w[0]..hi).max_by(|&a, &b| rows[a - 1].1.total_cmp(&rows[b - 1].1)).unwrap();
        if w[1] <= 500 {
            assert_eq!(arg, w[1] - 1);
        }
    }
    let fig2 = dir.path().join("fig2.csv");
    weyl(&["figure", "--N-max", "500", "--normalizer", "one_over_N", "--out", fig2.to_str().unwrap()]);
    let norm = read_series(&fig2);
    assert!(norm.iter().all(|&(_, v)| v > 0.0 && v < 3.0));
    let one = weyl(&["figure", "--N-max", "1"]);
    assert_eq!(stdout(&one).lines().count(), 2);
}

fn read_series(path: &Path) -> Vec<(u64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["N", "value"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn points_and_products() {
    let out = weyl(&["points", "--gen", "grid", "--N", "3"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,value");
    assert!(lines[1].starts_with("1,0.25"));
    assert_eq!(lines.len(), 4);
    let out = weyl(&["product", "--gen", "grid", "--N", "9", "--format", "json"]);
    let r = json(&out);
    assert!(r["logP"].as_str().unwrap().starts_with("2.3025850929940456840179914546"));
    let out = weyl(&["discrepancy", "--gen", "grid", "--N", "10"]);
    assert_eq!(json(&out)["exact"], "1/11");
    let out = weyl(&["points", "--gen", "extremal", "--N", "8", "--d", "1/4", "--format", "json"]);
    assert_eq!(json(&out)["points"].as_array().unwrap().len(), 8);
}

#[test]
fn extremal_report() {
    let out = weyl(&["extremal", "--N", "100", "--d", "0.05", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["M"], 5);
    assert_eq!(r["star_discrepancy"], "1/20");
    let p = r["logP_closed_form"].as_f64().unwrap();
    assert!(r["logLower"].as_f64().unwrap() <= p && p <= r["logUpper"].as_f64().unwrap());
    assert_eq!(r["B_epsilon"], 99);
}

#[test]
fn monte_carlo_is_reproducible_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("paths.csv");
    let sum_path = dir.path().join("summary.json");
    let args = [
        "mc", "iid", "--paths", "7", "--N", "3000", "--seed", "7", "--out", csv_path.to_str().unwrap(), "--summary",
        sum_path.to_str().unwrap(),
    ];
    assert_eq!(weyl(&args).status.code(), Some(0));
    let first = std::fs::read(&csv_path).unwrap();
    assert_eq!(weyl(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&csv_path).unwrap());

    let mut r = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["path_id", "N", "S_N", "B_N", "ratio"]);
    let ratios: Vec<f64> = r.records().map(|rec| rec.unwrap()[4].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 7);
    let summary: Value = serde_json::from_slice(&std::fs::read(&sum_path).unwrap()).unwrap();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(summary["ratio"]["mean"].as_f64().unwrap(), mean);
    assert_eq!(summary["ratio"]["variance"].as_f64().unwrap(), var);
    assert_eq!(summary["ratio"]["median"].as_f64().unwrap(), sorted[3]);
    assert_eq!(summary["ratio"]["max"].as_f64().unwrap(), sorted[6]);
}

#[test]
fn subsequence_flags_the_identity() {
    let out = weyl(&["mc", "subsequence", "--alpha", "sqrt2m1", "--paths", "4", "--N", "2000", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["identity_holds_all"], true);
    assert_eq!(r["identity_holds"].as_array().unwrap().len(), 4);
    let rad = weyl(&["mc", "rademacher", "--paths", "2", "--N", "5000", "--format", "json"]);
    assert!(json(&rad)["diagnostics"]["B_N_over_N"].as_f64().is_some());
}
