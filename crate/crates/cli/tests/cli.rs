use std::process::{Command, Output};

use serde_json::Value;

fn carousel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carousel")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("carousel-cli-{}-{name}", std::process::id()))
}

#[test]
fn polygon_round_trip() {
    let path = tmp("square.json");
    let out = carousel(&["--out", path.to_str().unwrap(), "cc", "polygon", "--k", "4", "--alpha", "2"]);
    assert!(out.status.success());
    let v = json(&carousel(&["cc", "verify", "--in", path.to_str().unwrap()]));
    assert_eq!(v["ok"], true);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["bodies"], 4);

    // a perturbed square is no longer central
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let x = cfg["positions"][0][0].as_f64().unwrap();
    cfg["positions"][0][0] = (x + 1e-3).into();
    std::fs::write(&path, cfg.to_string()).unwrap();
    let v = json(&carousel(&["cc", "verify", "--in", path.to_str().unwrap()]));
    assert_eq!(v["ok"], false);

    // and solving from it recovers a central configuration
    let v = json(&carousel(&["cc", "solve", "--in", path.to_str().unwrap()]));
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    std::fs::remove_file(path).ok();
}

#[test]
fn equilateral_lagrange() {
    let v = json(&carousel(&["cc", "lagrange", "--masses", "1,1,1", "--alpha", "3/2"]));
    let q: Vec<[f64; 2]> = serde_json::from_value(v["positions"].clone()).unwrap();
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let (a, b, c) = (d(q[0], q[1]), d(q[1], q[2]), d(q[0], q[2]));
    assert!((a - b).abs() < 1e-13 && (a - c).abs() < 1e-13);
}

#[test]
fn exit_codes() {
    assert_eq!(carousel(&["certify", "lagrange", "--masses", "1,1,1", "--alpha", "3/2"]).status.code(), Some(0));
    assert_eq!(carousel(&["certify", "lagrange", "--masses", "1,2,3", "--alpha", "2"]).status.code(), Some(3));
    assert_eq!(carousel(&["certify", "lagrange", "--masses", "1,1,1", "--alpha", "log"]).status.code(), Some(4));
    assert_eq!(carousel(&["certify", "lagrange", "--masses", "1,1", "--alpha", "2"]).status.code(), Some(2));
    // retrograde clusters are not supported
    let out = carousel(&["carousel", "plan", "--p", "-1", "--nu-p", "99"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn plan_windings() {
    let v = json(&carousel(&["carousel", "plan", "--p", "1", "--q", "1", "--nu-p", "99", "--alpha", "log"]));
    assert!((v["eps"].as_f64().unwrap() - 0.01).abs() < 1e-12, "{v}");
    let text = v.to_string();
    assert!(text.contains("100"), "{text}");
}

#[test]
fn refined_orbit_round_trip() {
    let path = tmp("refined.json");
    let out = carousel(&[
        "carousel", "refine", "--nu-p", "315", "--l", "12", "--checks", "16", "--save", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&carousel(&["carousel", "simulate", "--from", path.to_str().unwrap(), "--rtol", "1e-14", "--atol", "1e-16"]));
    assert!(v["periodicity_defect"].as_f64().unwrap() < 1e-8, "{v}");
    std::fs::remove_file(path).ok();
}
