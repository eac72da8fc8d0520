use std::path::Path;
use std::process::{Command, Output};

fn coarse_op(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse-op")).args(args).current_dir(cwd).env_remove("COARSE_OP_OUT").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generated_files_feed_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = coarse_op(&["space", "gen", "--spec", "path:30", "--file", "space.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = coarse_op(&["op", "gen", "--space", "space.json", "--kind", "band", "--radius", "2", "--normalize", "--file", "op.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = coarse_op(&["--out", "onl", "onl", "--op", "op.json", "--S", "0,2,8"], d);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = std::fs::read_to_string(d.join("onl/onl.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    let ratio = header.iter().position(|h| h == "ratio").unwrap();
    let ratios: Vec<f64> = rows.records().map(|r| r.unwrap()[ratio].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 3);
    // larger windows never do worse
    assert!(ratios.windows(2).all(|w| w[0] <= w[1] + 1e-9));

    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("onl/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["tables"][0]["file"], "onl.csv");
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn partition_build_reports_variation() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarse_op(&["--out", "pou", "pou", "build", "--space", "grid:1x20", "--method", "disjoint", "--scale", "3", "--r-grid", "0,2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("pou/variation.csv")).unwrap();
    assert!(csv.starts_with("method,scale,p,r,variation\n"));
    // characteristic functions do not vary at radius 0
    assert!(csv.lines().nth(1).unwrap().ends_with(",0e0"));
    assert!(dir.path().join("pou/partition.json").exists());
}

#[test]
fn environment_sets_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_coarse-op"))
        .args(["sparsify", "--space", "grid:1x40", "--m", "2", "--c", "0.8"])
        .current_dir(dir.path())
        .env("COARSE_OP_OUT", "from_env")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("from_env/sparsify.csv").exists());
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"kind": "sparsify", "space": {"type": "path", "params": {"n": 10}}, "grid": {"m": [0.5]}}"#).unwrap();
    let o = coarse_op(&["--config", "bad.json", "validate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("grid.m"));
    let o = coarse_op(&["--config", "bad.json", "sweep"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kind_mismatch_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"kind": "sparsify", "space": {"type": "path", "params": {"n": 10}}}"#).unwrap();
    let o = coarse_op(&["--config", "s.json", "onl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not onl"));
}

#[test]
fn non_contraction_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = coarse_op(&["op", "gen", "--space", "path:10", "--kind", "shift", "--p", "1", "--file", "shift.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = coarse_op(&["--out", "inv", "inverse", "--op", "shift.json", "--delta", "1.5"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_operator_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarse_op(&["onl", "--op", "nowhere.json", "--S", "1"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nowhere.json"));
}
