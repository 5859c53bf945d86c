use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn alpred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alpred")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn reduce_prints_profile_and_writes_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("alp.json");
    let o = alpred(&["reduce", &data("feasible_3x2.txt"), "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "vars=12 constraints=14 objective_terms=9");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["variables"].as_array().unwrap().len(), 12);
}

#[test]
fn decide_exit_codes() {
    let o = alpred(&["--json", "decide", &data("feasible_3x2.txt")]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["polytope_min"], "0");
    assert_eq!(r["oracles_agree"], true);

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("half.txt");
    std::fs::write(&f, "2 2\n1 1 = 1\n1 -1 = 0\n").unwrap();
    let o = alpred(&["--json", "decide", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["polytope_min"], "1/2");
    assert_eq!(r["witness"], Value::Null);

    std::fs::write(&f, "1 2\n1 2 = 1\n").unwrap();
    let o = alpred(&["decide", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn normalize_reaches_unit_alphabet() {
    let dir = tempfile::tempdir().unwrap();
    let alp = dir.path().join("alp.json");
    let norm = dir.path().join("norm.json");
    assert!(alpred(&["reduce", &data("feasible_3x2.txt"), "-o", alp.to_str().unwrap()]).status.success());
    let o = alpred(&["--json", "normalize", alp.to_str().unwrap(), "-o", norm.to_str().unwrap(), "--provenance"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let after = r["alphabet_after"].as_str().unwrap();
    let allowed = ["0", "1", "-1", "K", "-K"];
    assert!(after.trim_matches(|c| c == '{' || c == '}').split(',').all(|s| allowed.contains(&s)), "{after}");
    assert!(r["provenance"].as_object().is_some_and(|m| !m.is_empty()));

    let o = alpred(&["alp-feasible", norm.to_str().unwrap(), "--check-at", "1000,1000000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("feasible=true"));
}

#[test]
fn alp_feasible_json_reports_checks() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.txt");
    let alp = dir.path().join("alp.json");
    std::fs::write(&sys, "2 1\n1 = 1\n1 = -1\n").unwrap();
    assert!(alpred(&["reduce", sys.to_str().unwrap(), "-o", alp.to_str().unwrap()]).status.success());
    let o = alpred(&["--json", "alp-feasible", alp.to_str().unwrap(), "--check-at", "1000"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["feasible"], false);
    assert_eq!(r["certificate_verified"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn gen_is_reproducible_and_parsable() {
    let a = alpred(&["gen", "--n", "5", "--m", "3", "--seed", "9", "--planted"]);
    let b = alpred(&["gen", "--n", "5", "--m", "3", "--seed", "9", "--planted"]);
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    std::fs::write(&f, &a.stdout).unwrap();
    assert_eq!(alpred(&["decide", f.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn verify_gadgets_small() {
    let o = alpred(&["verify-gadgets", "--max-i", "5", "--max-n", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("all checks passed"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(alpred(&["reduce", "--bogus", "x"]).status.code(), Some(2));
    assert_eq!(alpred(&["reduce", "/definitely/missing"]).status.code(), Some(2));
    assert_eq!(alpred(&["alp-feasible", "x.json", "--check-at", "abc"]).status.code(), Some(2));
}
