//! End-to-end runs of the `splitlab` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn splitlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitlab"))
        .args(args)
        .env("SPLITLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn analyze_metallic() {
    let v = json_of(&splitlab(&["analyze", "--ratio", "per:3"]));
    assert_eq!(v["B0"], "3");
    assert_eq!(v["q1"], serde_json::json!([2, 4]));
    assert_eq!(v["T"], serde_json::json!([[3, 1], [1, 0]]));
    assert_eq!(v["sigma"], -1);
}

#[test]
fn analyze_golden_colored() {
    let v = json_of(&splitlab(&["analyze", "--ratio", "per:1,3"]));
    assert_eq!(v["B0"], "3");
    // stated value; the exact computation gives 5 (see the notes on B1 for b <= 4)
    assert_eq!(v["B1"], "7");
}

#[test]
fn analyze_reduces_pre_period() {
    let v = json_of(&splitlab(&["analyze", "--ratio", "pre:2;per:1,3"]));
    assert_eq!(v["tail"], "per:1,3");
    assert_eq!(v["T_tail"], serde_json::json!([[4, 1], [3, 1]]));
    assert_eq!(v["B0"], "3");
    assert_ne!(v["T"], v["T_tail"]);
}

#[test]
fn exit_codes() {
    assert_eq!(splitlab(&["analyze", "--ratio", "per:x"]).status.code(), Some(2));
    assert_eq!(splitlab(&["analyze", "--ratio", "per:0"]).status.code(), Some(2));
    assert_eq!(splitlab(&["envelope", "--points", "1"]).status.code(), Some(2));
    assert_eq!(splitlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(splitlab(&["melnikov", "--eps-ref", "0.5"]).status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = splitlab(&["envelope", "--ratio", "per:2", "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = splitlab(&["verify", "--a-max", "3", "--b-max", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("first: per:1,2"), "{err}");
}

#[test]
fn verify_table_lists_every_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitlab(&["verify", "--a-max", "6", "--b-max", "5", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let table = read(dir.path(), "verify.tsv");
    // 6 metallic, 10 two-periodic, per:1,2,2 and a header
    assert_eq!(table.lines().count(), 18);
    for r in ["per:6", "per:4,5", "per:1,2,2"] {
        assert!(table.lines().any(|l| l.starts_with(&format!("{r}\t"))), "{r} missing");
    }
    assert!(table.lines().any(|l| l.starts_with("per:2,3\tpass")));
    let rows: Value = serde_json::from_str(&read(dir.path(), "verify.json")).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 17);
}

#[test]
fn metallic_corner_list() {
    let out = splitlab(&["envelope", "--ratio", "per:3", "--periods", "2", "--format", "json"]);
    let v = json_of(&out);
    let corners = v.as_array().unwrap();
    assert_eq!(corners.len(), 4);
    let ln_lambda = ((3.0 + 13f64.sqrt()) / 2.0).ln();
    for w in corners.windows(2) {
        assert_ne!(w[0]["kind"], w[1]["kind"]);
        let du = w[1]["u"].as_f64().unwrap() - w[0]["u"].as_f64().unwrap();
        assert!((du - 2.0 * ln_lambda).abs() < 1e-9, "{du}");
    }
}

#[test]
fn two_primary_corner_counts() {
    let v = json_of(&splitlab(&["envelope", "--ratio", "per:1,2,2", "--format", "json"]));
    let corners = v.as_array().unwrap();
    let checks = corners.iter().filter(|c| c["kind"] == "check").count();
    assert_eq!((checks, corners.len()), (4, 12));
}

#[test]
fn envelope_artifacts_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = splitlab(&["envelope", "--ratio", "per:2,3", "--points", "200", "--out-dir", d.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    for f in ["envelope.csv", "corners.json", "envelope.gp"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let csv = read(a.path(), "envelope.csv");
    assert_eq!(csv.lines().next().unwrap(), "u,eps,h1,h2,h3,S1k1,S1k2,S2k1,S2k2,m_index,kappa");
    assert_eq!(csv.lines().count(), 201);
    assert!(read(a.path(), "envelope.gp").contains("plot 'envelope.csv'"));
}

#[test]
fn golden_sweep_has_four_lattice_zeros_everywhere() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = splitlab(&["melnikov", "--ratio", "per:1", "--points", "32", "--out-dir", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["melnikov.csv", "melnikov.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let rows: Value = serde_json::from_str(&read(a.path(), "melnikov.json")).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 32);
    let pi = std::f64::consts::PI;
    for row in rows {
        let zeros = row["report"]["zeros"].as_array().unwrap();
        assert_eq!(zeros.len(), 4);
        for z in zeros {
            for t in z["theta"].as_array().unwrap() {
                let r = t.as_f64().unwrap().rem_euclid(pi);
                assert!(r.min(pi - r) < 1e-8);
            }
        }
        assert_eq!(row["report"]["kappa"], 1);
    }
    let csv = read(a.path(), "melnikov.csv");
    assert!(csv.starts_with("eps,u,log_max_M,log_m_star,ratio_max,ratio_mstar,kappa,status\n"));
    assert!(csv.contains(",near_transition\n"));
}

#[test]
fn metallic_sweeps_have_kappa_one() {
    for r in ["per:2", "per:3"] {
        let out = splitlab(&["melnikov", "--ratio", r, "--points", "24"]);
        assert!(out.status.success());
        let csv = String::from_utf8(out.stdout).unwrap();
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').nth(6), Some("1"), "{r}: {line}");
        }
    }
}
