use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn wclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scheme(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "schemes", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json_of(args: &[&str]) -> (Output, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_string_lossy().into_owned();
    full.extend(["--json", &p]);
    let out = wclass(&full);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|_| "null".into());
    (out, serde_json::from_str(&text).unwrap())
}

fn close(v: &Value, x: f64, tol: f64) -> bool {
    v.as_f64().is_some_and(|y| (y - x).abs() <= tol)
}

#[test]
fn verify_entanglement_passes() {
    let (out, report) = json_of(&["verify", "entanglement"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report["status"], "pass");
    assert_eq!(report["schema_version"], 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn tight_tolerance_gives_exit_one() {
    let out = wclass(&["verify", "protocols", "--rounds", "2000", "--tol-structural", "0", "--tol-assert", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = wclass(&["verify", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn unknown_protocol_and_channel_are_usage_errors() {
    assert_eq!(wclass(&["protocol", "bb84"]).status.code(), Some(2));
    assert_eq!(wclass(&["protocol", "teleport", "--channel", "bell"]).status.code(), Some(2));
}

#[test]
fn multiport_scheme_is_deterministic_w4() {
    let (out, v) = json_of(&["optics-run", &scheme("multiport_w4.scheme")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(close(&v["probability"], 1.0, 1e-12));
    assert!(close(&v["fidelity"], 1.0, 1e-12));
    assert_eq!(v["conditional_state"].as_array().unwrap().len(), 4);
}

#[test]
fn tritter_scheme_succeeds_one_in_nine() {
    let (out, v) = json_of(&["optics-run", &scheme("tritter_w3v.scheme")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(close(&v["probability"], 1.0 / 9.0, 1e-12));
    assert!(close(&v["fidelity"], 1.0, 1e-12));
}

#[test]
fn malformed_scheme_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scheme");
    let text = std::fs::read_to_string(scheme("multiport_w4.scheme")).unwrap().replace("\"dft\"", "\"prism\"");
    std::fs::write(&path, text).unwrap();
    let out = wclass(&["optics-run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("elements[0].type"));
}

#[test]
fn missing_scheme_file_is_io_error() {
    let out = wclass(&["optics-run", "/nonexistent/none.scheme"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn distill_worked_example_from_typed_coefficients() {
    let (out, v) = json_of(&["protocol", "distill", "--a", "0.8", "--b", "0.5196152423", "--c", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    // b carries ten digits, so 0.27 holds to the input precision
    assert!(close(&v["success_probability"], 0.27, 1e-9));
    assert!(close(&v["expected_probability"], 0.27, 1e-12));
    assert!(close(&v["fidelity"], 1.0, 1e-12));
}

#[test]
fn distill_rejects_bad_coefficients() {
    let out = wclass(&["protocol", "distill", "--a", "0.3", "--b", "0.3", "--c", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(wclass(&["protocol", "distill", "--a", "0.8"]).status.code(), Some(2));
}

#[test]
fn teleport_over_w_channel() {
    let (out, v) = json_of(&["protocol", "teleport", "--channel", "w", "--trials", "100", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(close(&v["min_fidelity"], 1.0, 1e-12));
    assert_eq!(v["classical_bits"], 3);
}

#[test]
fn qkd_summary_is_reproducible() {
    let args = ["protocol", "qkd", "--rounds", "4000", "--seed", "11"];
    let (out, a) = json_of(&args);
    let (_, b) = json_of(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(a, b);
    let s = &a["summary"];
    assert_eq!(s["rounds"], 4000);
    assert_eq!(s["seed"], 11);
    assert_eq!(s["errors"], 0);
    assert!(close(&s["success_rate"], 0.25, 0.03));
    assert_eq!(a["rounds"].as_array().unwrap().len(), 4000);
}

#[test]
fn unwritable_report_path_is_io_error() {
    let out = wclass(&["verify", "states", "--json", "/nonexistent/dir/report.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write"));
}
