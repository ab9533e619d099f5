use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stochres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochres")).args(args).output().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn embed_check_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochres(&["embed-check", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["checks_passed"], true);
    assert_eq!(m["files"].as_array().unwrap().len(), 2);
}

#[test]
fn misspelled_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"experiment": "scan-n", "nosie": 0.1}"#).unwrap();
    let out = stochres(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosie"));
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"experiment": "warp-drive"}"#).unwrap();
    assert_eq!(stochres(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let out = stochres(&["tails", "--out-dir", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reruns_match_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ipc.json");
    fs::write(&cfg, r#"{"experiment": "ipc", "n": 3, "steps": 400, "shots": 64, "seed": 9}"#).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (d, t) in [(&a, "1"), (&b, "8")] {
        let out = stochres(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", d.to_str().unwrap(), "--threads", t]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(manifest(&a)["files"], manifest(&b)["files"]);
    assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
}
