use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pforge")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn capacity_of_width_four_interval() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", r#"{"intervals":[["0","4"]]}"#);
    let v = json_of(&run(&["capacity", "--sigma", s(&sigma)]));
    assert_eq!(v["capacity"], "1.0");
}

#[test]
fn serre_constants() {
    let v = json_of(&run(&["serre", "--tol", "1e-10"]));
    assert!((num(&v["a"]) - 0.0873528949).abs() <= 1e-8);
    assert!((num(&v["b"]) - 4.4110763504).abs() <= 1e-8);
    assert!((num(&v["mean"]) - 1.8983020089).abs() <= 1e-8);
}

#[test]
fn single_log_certificate_for_trace() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write(dir.path(), "p.json", r#"[{"coeffs":["0","1"]}]"#);
    let v = json_of(&run(&["smyth-optimize", "--objective", "trace", "--pool", s(&pool)]));
    assert!((num(&v["lambda"]) - 1.0).abs() <= 1e-6, "{}", v["lambda"]);
}

#[test]
fn certificate_round_trip_and_failure_exit() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write(dir.path(), "p.json", r#"{"polynomials":[{"coeffs":["0","1"]},{"coeffs":["-1","1"]}]}"#);
    let cert = dir.path().join("c.json");
    let out = run(&["smyth-optimize", "--objective", "trace", "--pool", s(&pool), "--out", s(&cert)]);
    assert!(out.status.success());
    let ok = run(&["smyth-certify", "--objective", "trace", "--cert", s(&cert)]);
    assert_eq!(json_of(&ok)["pass"], true);

    let mut v: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let lambda = num(&v["lambda"]);
    v["lambda"] = Value::String(format!("{}", lambda + 0.1));
    let bad = write(dir.path(), "bad.json", &v.to_string());
    let out = run(&["smyth-certify", "--objective", "trace", "--cert", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_json_is_a_usage_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", "{\"intervals\":\n [[\"0\", 4]\n");
    let out = run(&["capacity", "--sigma", s(&sigma)]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column"), "{err}");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["capacity"]).status.code(), Some(64));
    assert_eq!(run(&["serre", "--tol", "-1"]).status.code(), Some(64));
    assert_eq!(run(&["honda", "--q", "6"]).status.code(), Some(64));
}

#[test]
fn construct_emits_monic_eisenstein_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", r#"{"intervals":[["-2.6","2.6"]]}"#);
    let out = run(&["construct", "--sigma", s(&sigma), "--degree", "40"]);
    let v = json_of(&out);
    assert_eq!(v["degree"], 40);
    let coeffs: Vec<&str> = v["coeffs"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(coeffs.len(), 41);
    assert_eq!(coeffs[40], "1");
    for c in &coeffs[..40] {
        assert_eq!(c.parse::<i128>().unwrap() % 2, 0, "{c}");
    }
    assert_ne!(coeffs[0].parse::<i128>().unwrap() % 4, 0);
    assert_eq!(v["roots"].as_array().unwrap().len(), 40);
    // identical inputs give identical bytes
    let again = run(&["construct", "--sigma", s(&sigma), "--degree", "40"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn infeasible_degree_names_a_feasible_one() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", r#"{"intervals":[["-2.6","2.6"]]}"#);
    let out = run(&["construct", "--sigma", s(&sigma), "--degree", "5"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("try n >="));
}

#[test]
fn honda_report_carries_exact_comparison() {
    let v = json_of(&run(&["honda", "--q", "9"]));
    assert_eq!(v["q"], 9);
    assert_eq!(v["comparison_high"], "14.1016");
    assert!(num(&v["gap"]) <= 1e-2);
    assert!(num(&v["lower_exponent"]) < num(&v["upper_exponent"]));
}

#[test]
fn csv_output_for_potential_and_dual() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", r#"{"intervals":[["1","4"]]}"#);
    let csv = dir.path().join("u.csv");
    assert!(run(&["potential", "--sigma", s(&sigma), "--grid", "16", "--out", s(&csv)]).status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value"));
    assert_eq!(lines.count(), 16);

    let pool = write(dir.path(), "p.json", r#"[{"coeffs":["0","1"]}]"#);
    let d = dir.path().join("d.csv");
    assert!(run(&["smyth-dual", "--objective", "trace", "--pool", s(&pool), "--out", s(&d)]).status.success());
    let text = fs::read_to_string(&d).unwrap();
    assert!(text.starts_with("node,weight\n"));
    let mass: f64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn nu_identity_holds() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", r#"{"intervals":[["0.1","4.4"]]}"#);
    let v = json_of(&run(&["nu", "--sigma", s(&sigma)]));
    assert!(num(&v["identity_error"]) <= 1e-8);
}

#[test]
fn report_rejects_capacity_one() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "s.json", r#"{"intervals":[["0","4"]]}"#);
    let pool = write(dir.path(), "p.json", r#"[{"coeffs":["0","1"],"weight":"0.5"}]"#);
    let out = run(&["report", "--sigma", s(&sigma), "--pool", s(&pool)]);
    assert_eq!(out.status.code(), Some(64));
}
