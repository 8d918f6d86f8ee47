use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn signcone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signcone")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_example_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let ex = data("paper_example.json");
    let r = signcone(&["certify", ex.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stdout).contains("conclusion: at least 2 nontrivial solutions"));
    let v = json(&out);
    assert_eq!(v["conclusion"]["verdict"], "at least 2 nontrivial solutions");
    for rec in v["conditions"].as_array().unwrap() {
        for key in ["id", "computed", "threshold", "margin", "density", "verdict"] {
            assert!(rec.get(key).is_some(), "condition record without {key}");
        }
    }
}

#[test]
fn reports_are_byte_identical() {
    let ex = data("paper_example.json");
    let a = signcone(&["certify", ex.to_str().unwrap(), "--density", "24"]);
    let b = signcone(&["certify", ex.to_str().unwrap(), "--density", "24"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["settings"]["box_density"], 24);
}

#[test]
fn constants_on_zero_weight_fails() {
    let r = signcone(&["constants", data("zero_weight.json").to_str().unwrap()]);
    assert_ne!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("zero denominator"));
}

#[test]
fn invalid_problem_lists_all_errors() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(data("paper_example.json")).unwrap();
    let bad = src.replace("\"alpha\": -1", "\"alpha\": 1").replace("\"s\": [3, 5]", "\"s\": [3, -5]");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, bad).unwrap();
    let r = signcone(&["certify", path.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("alpha < 0"), "{err}");
    assert!(err.contains("s"), "{err}");
    assert_eq!(signcone(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn solve_writes_csv_per_solution() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sol.csv");
    let out = dir.path().join("solve.json");
    let ex = data("annulus_example.json");
    let r = signcone(&["solve", ex.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v = json(&out);
    let n = v["solutions"].as_array().unwrap().len();
    assert!(n >= 1);
    for k in 1..=n {
        let table = std::fs::read_to_string(dir.path().join(format!("sol_{k}.csv"))).unwrap();
        assert!(table.starts_with("t,u,v\n"));
        let radial = std::fs::read_to_string(dir.path().join(format!("sol_radial_{k}.csv"))).unwrap();
        let mut lines = radial.lines();
        assert_eq!(lines.next(), Some("r,u,v"));
        let first: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, 1.0);
    }
}

#[test]
fn reduce_round_trips_through_certify() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = dir.path().join("reduced.json");
    let ex = data("annulus_example.json");
    let r = signcone(&["reduce", ex.to_str().unwrap(), "--json", reduced.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v = json(&reduced);
    assert!(v.get("annulus").is_none());
    assert_eq!(v["kernels"][0]["type"], "three_point");
    let r = signcone(&["constants", reduced.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn spectral_and_optimal_interval() {
    let ex = data("paper_example.json");
    let r = signcone(&["spectral", ex.to_str().unwrap(), "--grid", "64"]);
    assert_eq!(r.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let study = v["components"][0]["grid_study"].as_array().unwrap();
    assert_eq!(study.last().unwrap()["n"], 64);
    assert_eq!(v["settings"]["solver"]["cells"], 64);

    let r = signcone(&["optimal-interval", ex.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!(v["components"][0].get("closed_form").is_none());
    assert!(v["components"][0]["numeric"]["b"].as_f64().unwrap() > 0.0);
}

#[test]
fn phi_mode_flag_changes_weights() {
    let ex = data("annulus_example.json");
    let printed = signcone(&["constants", ex.to_str().unwrap(), "--phi-mode", "paper_printed"]);
    let derived = signcone(&["constants", ex.to_str().unwrap(), "--phi-mode", "derived"]);
    assert_eq!(printed.status.code(), Some(0));
    assert_eq!(derived.status.code(), Some(0));
    assert_ne!(printed.stdout, derived.stdout);
    assert_eq!(signcone(&["constants", ex.to_str().unwrap(), "--phi-mode", "bogus"]).status.code(), Some(1));
}

#[test]
fn reproduce_example_passes() {
    let r = signcone(&["reproduce-example"]);
    let table = String::from_utf8_lossy(&r.stdout);
    assert_eq!(r.status.code(), Some(0), "{table}");
    assert!(table.contains("overall: PASS"));
    assert_eq!(table.matches("PASS").count(), 13);
}
