use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldc-forge")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// 64-bit messages, 16 seed copies, short hash chain.
fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    let config = r#"{
        "params": {
            "kappa": 4096, "w": 64, "q": 65536,
            "private": {"k_priv": 64, "block": {"m": 4, "n_out": 15, "k_out": 4}, "rho": 0.015},
            "jrep": {"justesen": {"m": 6, "n_out": 21, "k_out": 7}, "n_rep": 16, "alpha": 48},
            "safefn": {"kind": "hash_iterate", "t": 8}
        },
        "oracle_seed": "0101010101010101010101010101010101010101010101010101010101010101",
        "seed": 5
    }"#;
    fs::write(&path, config).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn min_space_of_a_path() {
    let o = bin(&["pebble", "--graph", "path8", "--min-space"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn encode_attack_decode() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let cw = dir.path().join("cw.json");
    let bad = dir.path().join("bad.json");
    let msg = "0123456789abcdef";
    assert!(bin(&["encode", "--config", &cfg, "--message-hex", msg, "--out", cw.to_str().unwrap()]).status.success());
    let o = bin(&["decode", "--config", &cfg, "--codeword", cw.to_str().unwrap(), "--all"]);
    assert_eq!(stdout(&o).trim(), msg);
    let o = bin(&["attack", "--config", &cfg, "--codeword", cw.to_str().unwrap(), "--strategy", "seed-killer", "--out", bad.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["decode", "--config", &cfg, "--codeword", bad.to_str().unwrap(), "--all"]);
    assert_eq!(stdout(&o).trim(), msg);
    let o = bin(&["decode", "--config", &cfg, "--codeword", cw.to_str().unwrap(), "--index", "1"]);
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let cw = dir.path().join("cw.json");
    let out = dir.path().join("out.json");
    bin(&["encode", "--config", &cfg, "--message-hex", "00000000000000ff", "--out", cw.to_str().unwrap()]);
    let greedy = bin(&["attack", "--config", &cfg, "--codeword", cw.to_str().unwrap(), "--strategy", "burst", "--rho", "0.3", "--out", out.to_str().unwrap()]);
    assert_eq!(greedy.status.code(), Some(1));
    assert!(!out.exists());
    let short = bin(&["encode", "--config", &cfg, "--message-hex", "00", "--out", out.to_str().unwrap()]);
    assert_eq!(short.status.code(), Some(2));
    let range = bin(&["decode", "--config", &cfg, "--codeword", cw.to_str().unwrap(), "--index", "64"]);
    assert_eq!(range.status.code(), Some(2));
    assert_eq!(bin(&["pebble", "--graph", "no-such-graph"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn experiment_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"game": "safety", "max_time": 4, "max_cq": 64, "w": 32, "trials": 20, "seed": 1,
            "params": {"safefn": {"kind": "hash_iterate", "t": 4},
                       "kappa": 4096, "w": 64, "q": 1024,
                       "private": {"k_priv": 64, "block": {"m": 4, "n_out": 15, "k_out": 4}, "rho": 0.015},
                       "jrep": {"justesen": {"m": 6, "n_out": 21, "k_out": 7}, "n_rep": 4, "alpha": 8}}}"#,
    )
    .unwrap();
    let csv = dir.path().join("trials.csv");
    let summary = dir.path().join("summary.json");
    let o = bin(&[
        "experiment", "--spec", spec.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--summary",
        summary.to_str().unwrap(), "--workers", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 21);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["pass"], true);
    assert_eq!(s["wins"], 0);
}

#[test]
fn calibrate_matches_the_frozen_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cal.json");
    let o = bin(&["calibrate", "--out", out.to_str().unwrap(), "--code", "4,15,4", "--trials", "200"]);
    assert!(o.status.success());
    let fresh: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let frozen: serde_json::Value =
        serde_json::from_str(include_str!("../../core/fixtures/justesen_calibration.json")).unwrap();
    assert_eq!(fresh["calibrations"][0], frozen["calibrations"][0]);
}
