use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect()
}

fn trih(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trih")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn table(v: &Value, name: &str, p: usize, q: usize) -> u64 {
    v["tables"][name][format!("{p},{q}")].as_u64().unwrap()
}

#[test]
fn ih_of_projective_plane() {
    let out = trih(&["ih", data("p2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for p in 0..3 {
        for q in 0..3 {
            assert_eq!(table(&v, "ih", p, q), u64::from(p == q), "IH^{p},{q}");
        }
    }
}

#[test]
fn output_is_byte_stable() {
    let f = data("p1xp1.json");
    let a = trih(&["chow", f.to_str().unwrap()]);
    let b = trih(&["chow", f.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_trih"))
        .args(["chow", f.to_str().unwrap()])
        .env("TRIH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn chow_of_blown_up_plane() {
    let v = json(&trih(&["chow", data("blpt_p2.json").to_str().unwrap()]));
    assert_eq!([0, 1, 2].map(|p| table(&v, "chow", p, p)), [1, 2, 1]);
    let pairings = v["pairings"].as_array().unwrap();
    assert_eq!(pairings[1]["rank"], 2);
    assert!(pairings.iter().all(|p| p["num_left"] == 0 && p["num_right"] == 0));
}

#[test]
fn hcoh_of_two_planes_is_not_symmetric() {
    let out = trih(&["hcoh", data("two_planes.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_ne!(table(&v, "hcoh", 0, 0), table(&v, "hcoh", 2, 2));
}

#[test]
fn kunneth_of_two_lines() {
    let p1 = data("p1.json");
    let out = trih(&["verify", p1.to_str().unwrap(), "--kunneth", p1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let k = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "kunneth").unwrap();
    assert_eq!(k["status"], "pass");
}

#[test]
fn unbalanced_input_fails_checks() {
    let out = trih(&["check", data("invalid/unbalanced_line.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("balancing"));
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(trih(&["ih", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(trih(&["ih", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn max_dim_guard() {
    let out = trih(&["ih", data("p2.json").to_str().unwrap(), "--max-dim", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_shipped_file_checks_clean() {
    for entry in std::fs::read_dir(data("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = trih(&["check", path.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{}", path.display());
            let v = json(&out);
            assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
        }
    }
}
