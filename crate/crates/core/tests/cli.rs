//! End-to-end checks of the command-line binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaoa-mld"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn detect_reports_matching_bits_at_high_snr() {
    let out = run(&[
        "detect",
        "--constellation",
        "16qam",
        "--snr",
        "30",
        "--seed",
        "5",
        "--runs",
        "10",
    ]);
    let v = json(&out);
    assert_eq!(v["constellation"], "16QAM");
    assert_eq!(v["tx_bits"], v["cml_bits"]);
    let rho = v["rho"].as_f64().unwrap();
    assert!(rho > 0.0 && rho <= 1.0);
    assert!(v.get("constant_free_rho").is_none());
}

#[test]
fn detect_is_reproducible_and_optionally_reports_constant_free_ratio() {
    let args = ["detect", "--seed", "9", "--runs", "5", "--constant-free-rho"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(json(&a)["constant_free_rho"].is_number());
}

#[test]
fn expand_confirms_predicted_zeros() {
    let v = json(&run(&[
        "expand",
        "--constellation",
        "2xqpsk",
        "--nrx",
        "2",
        "--channel",
        "rayleigh",
        "--seed",
        "3",
    ]));
    assert_eq!(v["degree"], 2);
    assert_eq!(v["prediction"]["degree_bound"], 2);
    assert_eq!(v["prediction"]["all_confirmed"], true);
    assert_eq!(v["ising"]["basis"], "spin");
    assert_eq!(v["instance"]["tx_bits"].as_str().unwrap().len(), 4);
}

#[test]
fn expand_skips_prediction_for_non_gray_labels() {
    let v = json(&run(&["expand", "--constellation", "binary:2x2"]));
    assert!(v["prediction"]["skipped"].is_string());
}

#[test]
fn landscape_writes_csv() {
    let path = scratch("landscape.csv");
    let out = run(&["landscape", "--grid", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,beta,f1_analytic,f1_simulated,expectation"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().all(|r| (r[2] - r[3]).abs() < 1e-8));
}

#[test]
fn experiment_writes_runs_table() {
    let config = scratch("experiment.json");
    let out_path = scratch("runs.csv");
    std::fs::write(
        &config,
        r#"{"constellation":"qpsk","channel":"awgn","snr_db":[15],"p":[1],"runs":5,"realizations":3,"seed":1}"#,
    )
    .unwrap();
    let out = run(&[
        "experiment",
        "ratio-vs-runs",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("p,runs,mean_rho,std_rho,median_rho\n"));
    assert!(text.lines().count() >= 3);
}

#[test]
fn verify_theorems_passes_on_small_trial_count() {
    let out = run(&[
        "verify-theorems",
        "--trials",
        "20",
        "--constellation",
        "qpsk",
        "--constellation",
        "16qam",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
    assert!(text.contains("16QAM degree: bound 2"));
}

#[test]
fn invalid_input_exits_with_one() {
    assert_eq!(run(&["detect", "--constellation", "7qam"]).status.code(), Some(1));
    let config = scratch("bad.json");
    std::fs::write(&config, r#"{"constellation":"qpsk","unknown_key":1}"#).unwrap();
    let out = run(&[
        "experiment",
        "ratio-vs-snr",
        "--config",
        config.to_str().unwrap(),
        "--out",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oversized_register_exits_with_two() {
    let out = run(&["expand", "--constellation", "64qam", "--ntx", "5"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
