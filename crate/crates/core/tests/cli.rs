use std::path::PathBuf;
use std::process::{Command, Output};

use robust_pandora::corr::solve_corr_commitment;
use robust_pandora::model::{regret_needle, HomogeneousSpec};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robust-pandora")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn solve_indep_json() {
    let out = run(&["solve", "--regime", "indep", "--ubar", "1", "--c", "0.3", "--n", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "solve");
    let alpha = v["results"]["alpha"].as_array().unwrap();
    assert_eq!(alpha.len(), 3);
    assert!((alpha[2].as_f64().unwrap() - 0.610_320).abs() < 1e-6);
    assert!((v["results"]["regret"].as_f64().unwrap() - 0.4599).abs() < 1e-12);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("}\n"));
    let keys = ["\"command\"", "\"params\"", "\"results\"", "\"schema_version\""].map(|k| text.find(k).unwrap());
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn solve_corr_opts_out_at_threshold() {
    let out = run(&["solve", "--regime", "corr", "--ubar", "1", "--c", "0.25", "--n", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["optout"], true);
    assert_eq!(v["results"]["regret"].as_f64().unwrap(), 0.75);
}

#[test]
fn exit_codes() {
    let bad_cost = run(&["solve", "--regime", "indep", "--ubar", "1", "--c", "2", "--n", "3"]);
    assert_eq!(bad_cost.status.code(), Some(2));
    assert!(!bad_cost.stderr.is_empty());
    assert_eq!(run(&["solve", "--regime", "nope", "--c", "0.3", "--n", "3"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--regime", "indep", "--n", "3"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--regime", "het", "--sweep", "n", "--to", "3"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn solve_csv_layout() {
    let out = run(&["solve", "--regime", "indep", "--c", "0.3", "--n", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "k,alpha,regret\n1,0.7,0.21\n2,0.657718120805,0.357\n");
    assert!(!text.contains('\r'));
}

#[test]
fn n_sweep_alpha_decreases() {
    let out =
        run(&["sweep", "--regime", "indep", "--sweep", "n", "--from", "1", "--to", "50", "--ubar", "1", "--c", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,alpha,regret"));
    let alpha: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(alpha.len(), 50);
    assert!(alpha.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn delta_sweep_total_nondecreasing() {
    let out = run(&["sweep", "--regime", "het", "--sweep", "delta", "--ubar", "1", "--ctotal", "0.6", "--steps", "30"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let total: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(total.len(), 30);
    assert!(total.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn verify_indep_passes() {
    let out = run(&["verify", "--regime", "indep", "--ubar", "1", "--c", "0.3", "--n", "4", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["results"]["pass"], true);
}

#[test]
fn verify_two_box_reports_q_discrepancy() {
    let out = run(&["verify", "--regime", "two-box", "--ubar", "1", "--c", "0.2", "--grid", "200"]);
    let v = json(&out);
    let r = &v["results"];
    assert!(r["nature_gap"].as_f64().unwrap() <= 1e-9);
    let notes: Vec<&str> = r["notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(notes.iter().any(|n| n.contains("alternative closed form")));
    assert!(r["details"]["q_discrepancy"].as_f64().unwrap() > 0.1);
    let expected = if r["pass"] == true { 0 } else { 3 };
    assert_eq!(out.status.code(), Some(expected));
}

#[test]
fn tampered_policy_file_fails_verification() {
    let good = scratch("policy_good.json");
    let bad = scratch("policy_bad.json");
    let alpha = [0.7, 0.98 / 1.49, 0.610_320_284_697_508_9];
    std::fs::write(&good, serde_json::json!({ "alpha": alpha }).to_string()).unwrap();
    std::fs::write(&bad, serde_json::json!({ "alpha": [0.7, 0.65, 0.61], "regret": 0.4599 }).to_string()).unwrap();
    let base = ["verify", "--regime", "indep", "--ubar", "1", "--c", "0.3", "--n", "3", "--policy-file"];
    let ok = run(&[&base[..], &[good.to_str().unwrap()]].concat());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let tampered = run(&[&base[..], &[bad.to_str().unwrap()]].concat());
    assert_eq!(tampered.status.code(), Some(3));
    assert_eq!(json(&tampered)["results"]["pass"], false);
}

#[test]
fn simulate_is_byte_stable_and_thread_independent() {
    let args = [
        "simulate",
        "--regime",
        "indep",
        "--c",
        "0.3",
        "--n",
        "5",
        "--truth",
        "iid:0.3",
        "--episodes",
        "50000",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let one = Command::new(env!("CARGO_BIN_EXE_robust-pandora"))
        .args(args)
        .env("ROBUST_PANDORA_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, one.stdout);
}

#[test]
fn simulate_indep_matches_minimax_regret() {
    let out = run(&[
        "simulate",
        "--regime",
        "indep",
        "--ubar",
        "1",
        "--c",
        "0.3",
        "--n",
        "5",
        "--truth",
        "iid:0.3",
        "--episodes",
        "1000000",
        "--seed",
        "42",
    ]);
    let r = &json(&out)["results"];
    let r_star = (1.0 - 0.7f64.powi(5)) * 0.7;
    let z = (r["mean_regret"].as_f64().unwrap() - r_star) / r["se_regret"].as_f64().unwrap();
    assert!(z.abs() <= 4.0, "z = {z}");
}

#[test]
fn simulate_needle_matches_closed_form() {
    let out = run(&[
        "simulate",
        "--regime",
        "corr",
        "--ubar",
        "1",
        "--c",
        "0.25",
        "--n",
        "4",
        "--truth",
        "needle:0.6",
        "--episodes",
        "400000",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    let spec = HomogeneousSpec::new(1.0, 0.25, 4).unwrap();
    let exact = regret_needle(&solve_corr_commitment(&spec).policy, 0.6, &spec).unwrap().get();
    let z = (r["mean_regret"].as_f64().unwrap() - exact) / r["se_regret"].as_f64().unwrap();
    assert!(z.abs() <= 4.0, "z = {z}");
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("sweep_out.csv");
    let _ = std::fs::remove_file(&path);
    let out = run(&[
        "sweep",
        "--regime",
        "interim",
        "--sweep",
        "n",
        "--from",
        "2",
        "--to",
        "4",
        "--c",
        "0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,m,alpha,regret\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn het_boxes_are_keyed_by_input_order() {
    let weights = |boxes: &str| -> Vec<f64> {
        let out = run(&["solve", "--regime", "het", "--boxes", boxes, "--format", "json"]);
        assert_eq!(out.status.code(), Some(0));
        json(&out)["results"]["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).collect()
    };
    let a = weights("1:0.2,1:0.4");
    let b = weights("1:0.4,1:0.2");
    assert!(a[0] > a[1]);
    assert_eq!(a[0].to_bits(), b[1].to_bits());
    assert_eq!(a[1].to_bits(), b[0].to_bits());
}
