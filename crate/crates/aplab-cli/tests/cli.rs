//! End-to-end tests of the binary: exit-code contract, file formats,
//! record-stream determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aplab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_file(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn count3ap_full_group_z7() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("full.set");
    write_file(&p, "set z:7 7\n0\n1\n2\n3\n4\n5\n6\n");
    let out = aplab(&["count3ap", p.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("raw 49"), "got: {text}");
    assert!(text.contains("nontrivial 42"));
}

#[test]
fn count3ap_behrend_file_has_no_nontrivial() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("behrend.set");
    let out = aplab(&["behrend", "--n", "500", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    let out = aplab(&["count3ap", p.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("nontrivial 0"), "got: {text}");
}

#[test]
fn count3ap_corrupt_header_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.set");
    write_file(&p, "sett z:7 1\n0\n");
    let out = aplab(&["count3ap", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bootstrap_rejects_out_of_range_eps() {
    let out = aplab(&[
        "bootstrap", "--group", "v:3:5", "--mode", "ffq", "--eps", "0.2", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2), "ε = 0.2 is outside (0, 1/8)");
}

#[test]
fn bootstrap_noise_zero_witness_is_inverse_density() {
    let out = aplab(&[
        "bootstrap", "--group", "v:3:5", "--mode", "ffq", "--eps", "0.1", "--codim0", "2",
        "--noise", "0.0", "--instances", "1", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rec: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let witness = rec["witness"].as_f64().unwrap();
    assert!((witness - 9.0).abs() < 1e-6, "witness {witness} ≠ 1/α = 9");
    assert_eq!(rec["codim_or_rank"].as_u64(), Some(2));
}

#[test]
fn bootstrap_batch_exit_zero_and_deterministic() {
    let args = [
        "bootstrap", "--group", "v:3:5", "--mode", "ffq", "--eps", "0.05", "--codim0", "2",
        "--noise", "0.05", "--instances", "5", "--seed", "11",
    ];
    let first = aplab(&args);
    let second = aplab(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same config + seed ⇒ identical records");
    assert_eq!(first.stdout.iter().filter(|&&b| b == b'\n').count(), 5);
}

#[test]
fn bootstrap_bohr_mode_runs() {
    let out = aplab(&[
        "bootstrap", "--group", "z:2003", "--mode", "bohr", "--eps", "0.05", "--instances",
        "1", "--rank", "1", "--seed", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"kind\":\"bootstrap-bohr\""));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.json");
    let cfg = r#"{"cmd":"iterate","group":"v:3:5","eps":0.5,"seed":9,"mode":null,"instances":null,"codim0":2,"noise":0.02,"rank":null,"max_steps":15,"p":null,"k":null,"strategy":null,"trials":null}"#;
    write_file(&p, cfg);
    let out = aplab(&["iterate", "--config", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"kind\":\"increment\""));
    assert!(text.contains("\"kind\":\"counts-match\""));
}

#[test]
fn iterate_zero_max_steps_rejected() {
    let out = aplab(&[
        "iterate", "--group", "v:3:5", "--eps", "0.5", "--max-steps", "0", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn increment_int_gcd_violation_rejected() {
    let out = aplab(&[
        "increment-int", "--group", "z:2004", "--eps", "0.2", "--k", "4", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bohr_subcommand_reports_regularity() {
    let out = aplab(&[
        "bohr", "--group", "z:1009", "--freqs", "1,7", "--width", "0.9", "--find-regular",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("regular true"), "got: {text}");
    assert!(text.starts_with("bohr z:1009 ["));
}

#[test]
fn verify_unknown_suite_exits_2() {
    let out = aplab(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_grp_suite_passes() {
    let out = aplab(&["verify", "grp"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] grp"));
}

#[test]
fn threads_env_does_not_change_records() {
    let args = [
        "bootstrap", "--group", "v:3:5", "--mode", "ffq", "--eps", "0.1", "--codim0", "2",
        "--noise", "0.05", "--instances", "4", "--seed", "21",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_aplab"))
        .args(args)
        .env("APLAB_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_aplab"))
        .args(args)
        .env("APLAB_THREADS", "8")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout, "record order is fixed by instance index");
}

#[test]
fn iterate_full_group_config_single_counts_match() {
    let out = aplab(&[
        "iterate", "--group", "v:3:4", "--eps", "0.1", "--codim0", "0", "--seed", "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1, "A = G matches counts in one step");
    assert!(text.contains("\"kind\":\"counts-match\""));
}
