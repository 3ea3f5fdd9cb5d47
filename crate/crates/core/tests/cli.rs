use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qreading(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qreading"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn capacity_erasure_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let cell = write(dir.path(), "cell.json", r#"{"kind":"erasure","d":2,"q":0.5}"#);
    let out = qreading(dir.path(), &["capacity", "--cell", &cell]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("capacity.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("blahut_arimoto,")).unwrap();
    let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 1.0).abs() < 1e-6);
    let json = read_json(&dir.path().join("capacity.json"));
    assert_eq!(json["quantities"]["blahut_arimoto"]["units"], "bits/use");
    assert!(json["quantities"]["closed_form"]["tolerance"].is_number());
}

#[test]
fn depolarizing_reports_quoted_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = qreading(dir.path(), &["capacity", "--cell-json", r#"{"kind":"depolarizing","d":2,"q":0}"#]);
    assert!(out.status.success());
    let q = &read_json(&dir.path().join("capacity.json"))["quantities"];
    assert!((q["blahut_arimoto"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((q["quoted_formula_difference"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "5", "weak-converse", "--cell-json", r#"{"kind":"erasure","d":2,"q":0.3}"#, "--restarts", "2", "--steps", "20", "--r-dim", "1"];
    assert!(qreading(a.path(), &args).status.success());
    assert!(qreading(b.path(), &args).status.success());
    for f in ["weak-converse.json", "weak-converse.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["strong-converse", "--n", "50", "--rate", "1.5", "--cell-json", r#"{"kind":"depolarizing","d":2,"q":0.3}"#];
    let run = |dir: &Path, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qreading"))
            .env("QREADING_THREADS", threads)
            .arg("--out-dir")
            .arg(dir)
            .args(args)
            .output()
            .unwrap()
    };
    assert!(run(a.path(), "1").status.success());
    assert!(run(b.path(), "4").status.success());
    let name = "strong-converse.json";
    assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    let bad = run(a.path(), "zero");
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_hhlw_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let cell = write(dir.path(), "cell.json", r#"{"kind":"hhlw","codebook":{"words":[["1","1"],["2","2"]]}}"#);
    let strat = write(dir.path(), "strategy.json", r#"{"kind":"hhlw"}"#);
    let out = qreading(dir.path(), &["simulate", "--cell", &cell, "--strategy", &strat]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let json = read_json(&dir.path().join("simulate.json"));
    assert!((json["quantities"]["p_succ"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "message,word,p_correct");
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn simulate_nonadaptive_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let code = write(dir.path(), "code.json", r#"{"words":[["I"],["X"],["Y"],["Z"]]}"#);
    // maximally entangled transmitter on R ⊗ A reads the noiseless Pauli cell perfectly
    let h = 0.5;
    let strat = write(
        dir.path(),
        "strategy.json",
        &format!(r#"{{"kind":"nonadaptive","transmitter":{{"re":[[{h},0,0,{h}],[0,0,0,0],[0,0,0,0],[{h},0,0,{h}]]}},"decoder":"pgm"}}"#),
    );
    let cell = r#"{"kind":"custom","labels":["I","X","Y","Z"],"channels":[
        {"kraus":[{"re":[[1,0],[0,1]]}]},
        {"kraus":[{"re":[[0,1],[1,0]]}]},
        {"kraus":[{"re":[[0,0],[0,0]],"im":[[0,-1],[1,0]]}]},
        {"kraus":[{"re":[[1,0],[0,-1]]}]}]}"#;
    let out = qreading(dir.path(), &["simulate", "--cell-json", cell, "--codebook", &code, "--strategy", &strat]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let p = read_json(&dir.path().join("simulate.json"))["quantities"]["p_succ"]["value"].as_f64().unwrap();
    assert!((p - 1.0).abs() < 1e-9);
}

#[test]
fn zero_error_demo_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = qreading(dir.path(), &["zero-error-demo"]);
    assert!(out.status.success());
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout, read_json(&dir.path().join("zero-error-demo.json")));
    let q = &stdout["quantities"];
    assert!((q["adaptive_p_succ"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let c1 = q["certificate_min_eig_n1"]["value"].as_f64().unwrap();
    assert!((c1 - 0.2928932188134524).abs() < 1e-12);
}

#[test]
fn second_order_half_is_capacity_term() {
    let dir = tempfile::tempdir().unwrap();
    let cell = r#"{"kind":"env_param","labels":["0","1"],"in_dim":1,
        "env_states":[{"re":[[0.9,0],[0,0.1]]},{"re":[[0.1,0],[0,0.9]]}],
        "interaction":{"kraus":[{"re":[[1,0],[0,1]]}]}}"#;
    let out = qreading(dir.path(), &["second-order", "--n", "1000", "--eps", "0.5", "--cell-json", cell]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let q = &read_json(&dir.path().join("second-order.json"))["quantities"];
    assert_eq!(q["bound"]["value"], q["capacity_term"]["value"]);
}

#[test]
fn thermal_cutoff_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = qreading(dir.path(), &["thermal", "--photon-numbers", "0,1", "--cutoff", "60"]);
    assert!(out.status.success());
    let json = read_json(&dir.path().join("thermal.json"));
    assert_eq!(json["cutoff"], 60);
    let c60 = json["quantities"]["capacity"]["value"].as_f64().unwrap();
    assert!(qreading(dir.path(), &["thermal", "--cutoff", "100"]).status.success());
    let c100 = read_json(&dir.path().join("thermal.json"))["quantities"]["capacity"]["value"].as_f64().unwrap();
    assert!((c60 - c100).abs() < 1e-6);
    let small = qreading(dir.path(), &["thermal", "--photon-numbers", "0,5", "--cutoff", "10"]);
    assert_eq!(small.status.code(), Some(1));
}

#[test]
fn errors_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qreading(dir.path(), &["no-such-command"]).status.code(), Some(2));
    let out = qreading(dir.path(), &["capacity", "--cell-json", r#"{"kind":"erasure","d":2,"q":1.5}"#]);
    assert_eq!(out.status.code(), Some(1));
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["error"]["parameter"], "q");
    let missing = qreading(dir.path(), &["capacity", "--cell", "/nonexistent/cell.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!dir.path().join("capacity.json").exists());
}
