use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noxsim_core::pipeline::Manifest;
use sha2::{Digest, Sha256};

const SMALL: &str = r#"
n_rand = 3
n_boot = 20
shots = 600
n_trotter_max = 4
mode = "shots"
seed = 5
"#;

fn noxsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noxsim")).args(args).output().expect("spawn noxsim")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn run_small(dir: &Path) -> String {
    fs::write(dir.join("cfg.toml"), SMALL).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_noxsim"))
        .current_dir(dir)
        .args(["run", "--config", "cfg.toml", "--out", "out"])
        .output()
        .expect("spawn noxsim");
    ok(out)
}

#[test]
fn run_writes_hashed_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_small(dir.path());
    assert!(stdout.contains("NOX+RC+RCAL"));
    let out = dir.path().join("out");
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, 5);
    for name in ["config.toml", "results.json", "series.csv", "plot_free.csv", "plot_interacting.csv", "fits.csv", "metrics.csv"] {
        let entry = manifest.files.iter().find(|f| f.file == name).unwrap_or_else(|| panic!("{name} missing"));
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(entry.bytes, bytes.len());
        assert_eq!(entry.sha256, hex::encode(Sha256::digest(&bytes)));
    }
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with(&format!("# config_sha256={}", manifest.config_sha256)));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_small(a.path());
    run_small(b.path());
    let mut names: Vec<_> = fs::read_dir(a.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in names {
        let x = fs::read(a.path().join("out").join(&n)).unwrap();
        let y = fs::read(b.path().join("out").join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
    }
}

#[test]
fn report_and_analyze_read_back_results() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_small(dir.path());
    let out = dir.path().join("out");
    let table = ok(noxsim(&["report", "--out", out.to_str().unwrap()]));
    assert!(stdout.starts_with(&table));
    let analyzed = ok(noxsim(&["analyze", out.join("series.csv").to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&analyzed).unwrap();
    assert!(v["fits"]["interacting/NOX+RC+RCAL"].is_object());
    assert!(v["time_delays"].is_object());
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n_rand = 3\nshotz = 10\n").unwrap();
    let out = noxsim(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("shotz"));
    let out = noxsim(&["run", "--mode", "sometimes"]);
    assert!(!out.status.success());
    let out = noxsim(&["report", "--out", dir.path().join("nowhere").to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn simulate_circuit_file() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("bell.txt");
    fs::write(&circ, "qubits 2\nmeasure 0 1\nE rx(0,pi/2)\nH cx(0,1)\n").unwrap();
    let cfg = dir.path().join("noiseless.toml");
    fs::write(&cfg, "mode = \"exact\"\n[noise]\n").unwrap();
    let json = ok(noxsim(&["simulate", "--config", cfg.to_str().unwrap(), "--circuit", circ.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let text = v.to_string();
    assert!(text.contains("0.5"), "{text}");
}

#[test]
fn mitigate_counts_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.jsonl");
    let lines = [
        r#"{"circuit_id":"c0","role":{"kind":"base"},"randomization":0,"shots":100,"counts":{"0":20,"1":80}}"#,
        r#"{"circuit_id":"c1","role":{"kind":"amplified","target":0},"randomization":0,"shots":100,"counts":{"0":50,"1":50}}"#,
        r#"{"circuit_id":"r0","role":{"kind":"rcal","prepared":0},"shots":100,"counts":{"0":100}}"#,
        r#"{"circuit_id":"r1","role":{"kind":"rcal","prepared":1},"shots":100,"counts":{"1":100}}"#,
    ];
    fs::write(&path, lines.join("\n")).unwrap();
    let json = ok(noxsim(&["mitigate", path.to_str().unwrap(), "--observable", "1", "--n-boot", "10"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["rc"]["value"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!((v["nox"]["value"].as_f64().unwrap() - 0.83).abs() < 1e-12);
    fs::write(&path, "{not json}\n").unwrap();
    assert!(!noxsim(&["mitigate", path.to_str().unwrap()]).status.success());
}
