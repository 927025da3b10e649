//! End-to-end runs of the `gbdt` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gbdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbdt")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = r#"{
  "schema_version": 1,
  "system": {
    "m": 2,
    "J": [[0, 1], [1, 0]],
    "interval": [0, 1],
    "xi": 0,
    "hamiltonian": { "constant_beta": [[1, [0, 1]]] }
  },
  "gbdt": { "diagonal": { "b": [[0, 1]], "g": [1], "h": [0] } },
  "tasks": TASKS
}
"#;

fn write_config(dir: &Path, tasks: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, SMALL.replace("TASKS", tasks)).unwrap();
    p
}

#[test]
fn bundled_scenario_passes_and_emits_tables() {
    let out = tempfile::tempdir().unwrap();
    let o = gbdt(&["run", s(&scenario("example51_n1.json")), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let results: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(results["all_pass"], true);
    let files: Vec<String> = fs::read_dir(out.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(files.iter().any(|f| f.contains("example-n1_Wtilde")));
    assert!(files.iter().any(|f| f.contains("example-n1_residuals")));

    let jump = files.iter().find(|f| f.ends_with("_rh-jump.csv")).expect("rh-jump table");
    let mut rdr = csv::Reader::from_path(out.path().join(jump)).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[..3], ["s", "re_11", "im_11"]);
    let err_col = header.iter().position(|h| h == "err_R2").expect("jump error column");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[err_col].parse::<f64>().unwrap() <= 1e-3);
    }

    let rep = gbdt(&["report", s(&out.path().join("results.json"))]);
    assert_eq!(rep.status.code(), Some(0));
    let table = String::from_utf8(rep.stdout).unwrap();
    assert!(table.contains("max_err_Wtilde") && !table.contains("FAIL"));
}

#[test]
fn signature_violation_exits_2_naming_the_block() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, SMALL.replace("[[0, 1], [1, 0]]", "[[1, 0], [0, 2]]").replace("TASKS", r#"[{ "task": "validate" }]"#)).unwrap();
    let o = gbdt(&["run", s(&p), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("system.J"), "{err}");
    assert!(err.contains("bad.json:5:"), "{err}");
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for tasks in [r#"[{ "task": "evolve", "grid": 3 }]"#, r#"[{ "task": "nope" }]"#] {
        let p = write_config(dir.path(), tasks);
        assert_eq!(gbdt(&["run", s(&p), "--out", s(dir.path())]).status.code(), Some(2), "{tasks}");
    }
    let p = write_config(dir.path(), "[]");
    assert_eq!(gbdt(&["run", s(&p), "--tol", "0.5"]).status.code(), Some(2));
    assert_eq!(gbdt(&["run", s(&dir.path().join("missing.json"))]).status.code(), Some(2));
}

#[test]
fn empty_task_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "[]");
    let o = gbdt(&["run", s(&p), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let rep = gbdt(&["report", s(&dir.path().join("results.json"))]);
    assert_eq!(rep.status.code(), Some(0));
    let table = String::from_utf8(rep.stdout).unwrap();
    assert!(!table.contains("pass") && !table.contains("FAIL"));
}

#[test]
fn failing_check_is_flagged_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), r#"[{ "task": "validate" }, { "task": "evolve", "grid_points": 5 }]"#);
    assert_eq!(gbdt(&["run", s(&p), "--out", s(dir.path())]).status.code(), Some(0));
    let path = dir.path().join("results.json");
    let mut v: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    v["tasks"][1]["checks"][0]["pass"] = serde_json::Value::Bool(false);
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let rep = gbdt(&["report", s(&path)]);
    assert_eq!(rep.status.code(), Some(1));
    let table = String::from_utf8(rep.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.contains("FAIL")).count(), 1);
    assert!(table.lines().any(|l| l.contains("identity_residual") && l.contains("FAIL")));
}

#[test]
fn numerical_failure_exits_1_with_task_and_location() {
    // with B = i, g = 1, S vanishes where Im ln(i - x) = h; h = pi - atan 2 puts that at x = 0.5
    let dir = tempfile::tempdir().unwrap();
    let src = SMALL
        .replace(r#""h": [0]"#, r#""h": [2.0344439357957027]"#)
        .replace("TASKS", r#"[{ "task": "evolve", "grid_points": 11 }]"#);
    let p = dir.path().join("singular.json");
    fs::write(&p, src).unwrap();
    let o = gbdt(&["run", s(&p), "--out", s(dir.path())]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(o.status.code(), Some(1), "{err}");
    assert!(err.contains("evolve") && err.contains("x ="), "{err}");
}

#[test]
fn corrupt_results_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("results.json");
    fs::write(&p, "{ not json").unwrap();
    assert_eq!(gbdt(&["report", s(&p)]).status.code(), Some(2));
    assert_eq!(gbdt(&["report", s(&dir.path().join("none.json"))]).status.code(), Some(2));
}
