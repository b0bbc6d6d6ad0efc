use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn latdft(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latdft")).args(args).current_dir(dir).output().expect("binary runs")
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ok.txt", "2 2\n5 1\n0 1\n");
    write(dir.path(), "gcd.txt", "2 2\n4 1\n0 1\n");
    write(dir.path(), "junk.txt", "2 2\n5 x\n0 1\n");
    let ok = latdft(&["validate", "--input", "ok.txt"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let s = summary(&ok);
    assert_eq!(s["N"], "5");
    assert_eq!(s["gcd"], "1");

    let bad = latdft(&["validate", "--input", "gcd.txt"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(summary(&bad)["gcd"], "2");
    assert!(String::from_utf8_lossy(&bad.stderr).contains("= 2"));

    assert_eq!(latdft(&["validate", "--input", "junk.txt"], dir.path()).status.code(), Some(1));
    assert_eq!(latdft(&["validate", "--input", "missing.txt"], dir.path()).status.code(), Some(1));
    assert_eq!(latdft(&["validate"], dir.path()).status.code(), Some(1));
}

#[test]
fn reduce_writes_a_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "b.txt", "2 2\n2 1\n0 1\n");
    let out = latdft(&["reduce", "--input", "b.txt", "--epsilon", "1/16", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["verified"], true);
    assert!(s["max_relative_error"].as_f64().unwrap() <= 1.0 / 16.0);
    let text = fs::read_to_string(dir.path().join("r/certificate.json")).unwrap();
    let cert = latdft::sysnf::ReductionCertificate::from_json(&text).unwrap();
    cert.verify().unwrap();
    assert_eq!(cert.scale.to_string(), s["T"].as_str().unwrap());

    let zero = latdft(&["reduce", "--input", "b.txt", "--epsilon", "0", "--out", "r"], dir.path());
    assert_eq!(zero.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&zero.stderr).contains("[sysnf]"));
}

#[test]
fn reduce_accepts_sysnf_input() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.txt", "2 2\n5 1\n0 1\n");
    let out = latdft(&["reduce", "--input", "s.txt", "--epsilon", "1/256", "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(summary(&out)["max_relative_error"].as_f64().unwrap() <= 1.0 / 256.0);
}

#[test]
fn dft_and_qft_sim_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.txt", "2 2\n5 1\n0 1\n");
    let d = latdft(&["dft", "--input", "s.txt", "--out", "d"], dir.path());
    assert_eq!(d.status.code(), Some(0));
    assert!(summary(&d)["unitarity_deviation"].as_f64().unwrap() <= 1e-10);
    let csv = fs::read_to_string(dir.path().join("d/dft.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 10);

    let q = latdft(&["qft-sim", "--input", "s.txt", "--out", "q"], dir.path());
    assert_eq!(q.status.code(), Some(0));
    let s = summary(&q);
    assert_eq!(s["agrees"], true);
    assert!(s["max_amplitude_deviation"].as_f64().unwrap() <= 1e-10);
    let psi = latdft::qcirc::read_snapshot(&dir.path().join("q/qft_origin.bin")).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-12);

    let guarded = latdft(&["dft", "--input", "s.txt", "--size-guard", "4", "--out", "d"], dir.path());
    assert_eq!(guarded.status.code(), Some(2));
}

#[test]
fn sample_meets_the_gaussian_acceptance_bound_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "b.txt", "2 2\n2 1\n0 1\n");
    write(
        dir.path(),
        "cfg.json",
        r#"{"basis": "b.txt", "spec": {"kind": "gaussian", "s": 16.0}, "epsilon": "1/16", "shots": 300, "seed": 9}"#,
    );
    let a = latdft(&["sample", "--input", "cfg.json", "--out", "a"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let s = summary(&a);
    assert!(s["tv_distance"].as_f64().unwrap() <= 0.05);
    assert_eq!(s["decode_mismatch_rate"], 0.0);
    assert_eq!(s["sigma_inverse_applied"], true);
    assert_eq!(s["seed"], 9);
    let samples = fs::read_to_string(dir.path().join("a/samples.csv")).unwrap();
    assert_eq!(samples.lines().next(), Some("x1,x2"));
    assert_eq!(samples.lines().count(), 301);

    let b = latdft(&["sample", "--input", "cfg.json", "--out", "b"], dir.path());
    assert_eq!(samples, fs::read_to_string(dir.path().join("b/samples.csv")).unwrap());
    assert_eq!(s["config_hash"], summary(&b)["config_hash"]);

    let c = latdft(&["sample", "--input", "cfg.json", "--seed", "10", "--out", "c"], dir.path());
    assert_ne!(s["config_hash"], summary(&c)["config_hash"]);
    assert_eq!(summary(&c)["seed"], 10);
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.txt", "2 2\n5 1\n0 1\n");
    let capped = Command::new(env!("CARGO_BIN_EXE_latdft"))
        .args(["validate", "--input", "s.txt"])
        .env("LATDFT_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_latdft"))
        .args(["validate", "--input", "s.txt"])
        .env("LATDFT_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn selftest_passes_with_machine_readable_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = latdft(&["selftest", "--out", "st"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("st/summary.json")).unwrap()).unwrap();
    assert_eq!(s["passed"], true);
    assert_eq!(s["checks"].as_array().unwrap().len(), 15);
    assert!(s["config_hash"].is_string());
    assert!(s["seed"].is_u64());
}
