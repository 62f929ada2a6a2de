use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

fn run(config: &Value, out: &Path, extra: &[&str]) -> Output {
    let path = out.join("config.json");
    fs::create_dir_all(out).unwrap();
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_cocycle-lab"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out.join("results"))
        .args(extra)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn constant(rows: Value) -> Value {
    json!({"constant": rows})
}

#[test]
fn counterexample_is_verified() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&json!({"experiment": "counterexample"}), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&dir.path().join("results/counterexample.json"));
    assert_eq!(report["result"]["status"], "verified");
}

#[test]
fn constant_spectrum_is_log_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "spectrum",
        "subshift": {"full_shift": 2},
        "cocycle": constant(json!([[3, 0], [0, "1/3"]])),
        "seed": 1,
        "params": {"n": 1000}
    });
    let o = run(&cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("results/spectrum.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |name: &str| -> f64 { row[header.iter().position(|h| h == name).unwrap()].parse().unwrap() };
    assert!((get("lambda1") - 3f64.ln()).abs() <= 1e-12);
    assert!((get("lambda2") + 3f64.ln()).abs() <= 1e-12);
}

#[test]
fn empty_adjacency_row_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "spectrum",
        "subshift": {"adjacency": [[1, 1], [0, 0]]},
        "cocycle": constant(json!([[2, 0], [0, 1]])),
        "seed": 1
    });
    let o = run(&cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("adjacency row 2 empty"), "{}", stderr(&o));
}

#[test]
fn schema_violations_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = json!({"experiment": "counterexample", "colour": "blue"});
    assert_eq!(run(&unknown, dir.path(), &[]).status.code(), Some(2));
    let bad_name = json!({"experiment": "spectra"});
    let o = run(&bad_name, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment"));
    let missing = Command::new(env!("CARGO_BIN_EXE_cocycle-lab"))
        .args(["--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn rotation_has_no_dirac_support() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "dirac-support",
        "subshift": {"full_shift": 2},
        "cocycle": constant(json!([[0, -1], [1, 0]])),
        "seed": 3,
        "params": {"n": 20, "samples": 2, "spectrum_steps": 1000}
    });
    let o = run(&cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn every_output_carries_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "periodic-spectrum",
        "subshift": {"full_shift": 2},
        "cocycle": {"generators": [[[2, 0], [0, "1/2"]], [[1, 1], [0, 1]]]},
        "params": {"max_period": 4}
    });
    let o = run(&cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let res = dir.path().join("results");
    let manifest = read_json(&res.join("manifest.json"));
    let hash = manifest["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(read_json(&res.join("periodic-spectrum.json"))["config_hash"], hash.as_str());
    let mut rdr = csv::Reader::from_path(res.join("periodic-spectrum.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().last(), Some("config_hash"));
    for r in rdr.records() {
        assert_eq!(r.unwrap().iter().last(), Some(hash.as_str()));
    }
    for (name, digest) in manifest["files"].as_object().unwrap() {
        let bytes = fs::read(res.join(name)).unwrap();
        let actual: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(digest, actual.as_str(), "{name}");
    }

    let edited = json!({
        "experiment": "periodic-spectrum",
        "subshift": {"full_shift": 2},
        "cocycle": {"generators": [[[2, 0], [0, "1/2"]], [[1, 1], [0, 1]]]},
        "params": {"max_period": 5}
    });
    let other = tempfile::tempdir().unwrap();
    assert!(run(&edited, other.path(), &[]).status.success());
    let rehash = read_json(&other.path().join("results/manifest.json"))["config_hash"].clone();
    assert_ne!(rehash, hash.as_str());
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "spectrum",
        "subshift": {"full_shift": 2},
        "cocycle": {"generators": [[[2, 0], [0, "1/2"]], [[1, 1], [0, 1]]]},
        "seeds": [1, 2],
        "params": {"n": 1000}
    });
    let o = run(&cfg, dir.path(), &["--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = read_json(&dir.path().join("results/manifest.json"));
    assert_eq!(manifest["seeds"], json!([7]));
    let csv = fs::read_to_string(dir.path().join("results/spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.contains("\r\n"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let cfg = json!({
        "experiment": "spectrum",
        "subshift": {"full_shift": 2},
        "cocycle": {"generators": [[[2, 0], [0, "1/2"]], [[1, 1], [0, 1]]]},
        "seeds": [1, 2, 3, 4, 5],
        "params": {"n": 2000}
    });
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&cfg, a.path(), &["--threads", "1"]).status.success());
    assert!(run(&cfg, b.path(), &["--threads", "4"]).status.success());
    for f in ["spectrum.csv", "spectrum.json", "manifest.json"] {
        assert_eq!(fs::read(a.path().join("results").join(f)).unwrap(), fs::read(b.path().join("results").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn near_singular_tables_are_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "ustate-martingale",
        "subshift": {"full_shift": 2},
        "cocycle": constant(json!([[1, 0], [0, 1e-14]])),
        "seed": 1,
        "params": {"n_list": [5]}
    });
    let o = run(&cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("condition number"));
}
