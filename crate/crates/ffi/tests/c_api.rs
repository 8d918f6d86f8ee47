use std::ffi::{CStr, CString};
use std::ptr;

use signcone_ffi::*;

const EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/paper_example.json");

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let owned = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { signcone_string_free(s) };
    owned
}

fn last_error() -> String {
    let p = signcone_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load_example() -> *mut SignconeProblem {
    let path = CString::new(EXAMPLE).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { signcone_problem_from_file(path.as_ptr(), &mut h) }, SignconeStatus::Ok);
    assert!(signcone_last_error().is_null());
    h
}

#[test]
fn constants_and_certificate_round_trip() {
    let h = load_example();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { signcone_constants_json(h, &mut out) }, SignconeStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["c"][0].as_f64(), Some(0.25));
    assert_eq!(v["c"][1].as_f64(), Some(0.5));

    assert_eq!(unsafe { signcone_certify_json(h, &mut out) }, SignconeStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["conclusion"]["verdict"], "at least 2 nontrivial solutions");
    unsafe { signcone_problem_free(h) };
}

#[test]
fn solve_finds_two_solutions() {
    let h = load_example();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { signcone_solve_json(h, &mut out) }, SignconeStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["solutions"].as_array().unwrap().len(), 2);
    unsafe { signcone_problem_free(h) };
}

#[test]
fn errors_set_status_and_message() {
    let mut h = ptr::null_mut();
    let bad = CString::new(r#"{"version": 1, "nonlinearities": ["u", "v"], "kernels": "nope"}"#).unwrap();
    assert_eq!(unsafe { signcone_problem_from_json(bad.as_ptr(), &mut h) }, SignconeStatus::Validation);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { signcone_problem_from_json(ptr::null(), &mut h) }, SignconeStatus::NullPointer);
    assert!(last_error().contains("null"));

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { signcone_constants_json(ptr::null(), &mut out) }, SignconeStatus::NullPointer);
    assert!(out.is_null());

    let zero = std::fs::read_to_string(EXAMPLE).unwrap().replace("\"e^2*(1-t)^2\"", "\"0\"");
    let zero = CString::new(zero).unwrap();
    assert_eq!(unsafe { signcone_problem_from_json(zero.as_ptr(), &mut h) }, SignconeStatus::Ok);
    assert_eq!(unsafe { signcone_constants_json(h, &mut out) }, SignconeStatus::Numeric);
    assert!(last_error().contains("zero denominator"));
    unsafe { signcone_problem_free(h) };
    unsafe { signcone_problem_free(ptr::null_mut()) };
    unsafe { signcone_string_free(ptr::null_mut()) };
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(signcone_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/signcone.h")).unwrap();
    for name in [
        "signcone_problem_from_json",
        "signcone_problem_from_file",
        "signcone_problem_free",
        "signcone_constants_json",
        "signcone_certify_json",
        "signcone_solve_json",
        "signcone_string_free",
        "signcone_last_error",
        "signcone_version",
        "SIGNCONE_STATUS_NUMERIC = 2",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
