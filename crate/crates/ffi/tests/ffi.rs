use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cycmzv_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = cycmzv_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn exact_value_roundtrip() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(cycmzv_z_exact(c("1").as_ptr(), 5, false, &mut e), CycmzvStatus::Ok);
        let mut n = 0;
        assert_eq!(cycmzv_elem_level(e, &mut n), CycmzvStatus::Ok);
        assert_eq!(n, 5);

        let mut json = ptr::null_mut();
        assert_eq!(cycmzv_elem_to_json(e, &mut json), CycmzvStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        // z_5(1) = 2(1 - ζ_5)
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["coeffs"], serde_json::json!(["2", "-2", "0", "0"]));

        let mut back = ptr::null_mut();
        assert_eq!(cycmzv_elem_from_json(json, &mut back), CycmzvStatus::Ok);
        let mut eq = false;
        assert_eq!(cycmzv_elem_equal(e, back, &mut eq), CycmzvStatus::Ok);
        assert!(eq);
        cycmzv_string_free(json);
        cycmzv_elem_free(back);
        cycmzv_elem_free(e);
    }
}

#[test]
fn arithmetic_and_level_mismatch() {
    unsafe {
        let (mut a, mut b, mut d) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(cycmzv_z_exact(c("2").as_ptr(), 7, false, &mut a), CycmzvStatus::Ok);
        assert_eq!(cycmzv_z_exact(c("2").as_ptr(), 8, false, &mut b), CycmzvStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(cycmzv_elem_binop(a, CycmzvOp::Add, b, &mut r), CycmzvStatus::LevelMismatch);
        assert!(r.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(cycmzv_elem_binop(a, CycmzvOp::Sub, a, &mut d), CycmzvStatus::Ok);
        assert_eq!(cycmzv_elem_binop(a, CycmzvOp::Div, d, &mut r), CycmzvStatus::DivisionByZero);
        assert_eq!(cycmzv_elem_binop(a, CycmzvOp::Div, a, &mut r), CycmzvStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(cycmzv_elem_embed(r, 1, 64, &mut re, &mut im), CycmzvStatus::Ok);
        assert!((re - 1.0).abs() < 1e-15 && im.abs() < 1e-15);
        for h in [a, b, d, r] {
            cycmzv_elem_free(h);
        }
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(cycmzv_z_exact(c("2,x").as_ptr(), 5, false, &mut e), CycmzvStatus::Parse);
        assert!(last_error().contains("index"));
        assert_eq!(cycmzv_z_exact(ptr::null(), 5, false, &mut e), CycmzvStatus::NullPointer);
        assert_eq!(cycmzv_z_exact(c("2").as_ptr(), 5, false, ptr::null_mut()), CycmzvStatus::NullPointer);
        assert_eq!(cycmzv_z_exact(c("2").as_ptr(), 0, false, &mut e), CycmzvStatus::InvalidArgument);
        let mut d = 0usize;
        assert_eq!(cycmzv_observed_dimension(3, 9, &mut d), CycmzvStatus::NotPrime);
        cycmzv_elem_free(ptr::null_mut());
        cycmzv_hpoly_free(ptr::null_mut());
        cycmzv_string_free(ptr::null_mut());
    }
}

#[test]
fn relation_checks() {
    unsafe {
        let json = c(r#"[{"index": "4,1", "coeff": "1"}, {"index": "3,1,1", "coeff": "-2"}]"#);
        let mut w = ptr::null_mut();
        assert_eq!(cycmzv_hpoly_from_json(json.as_ptr(), &mut w), CycmzvStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(cycmzv_hpoly_to_string(w, &mut s), CycmzvStatus::Ok);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "-2*e(3,1,1) + e(4,1)");
        cycmzv_string_free(s);

        let mut holds = false;
        let mut report = ptr::null_mut();
        let st = cycmzv_verify_relation(w, CycmzvRing::A, false, 7, 100, &mut holds, &mut report);
        assert_eq!(st, CycmzvStatus::Ok);
        assert!(holds);
        let r: serde_json::Value = serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        assert!(r.get("97").is_some() || r.to_string().contains("97"));
        cycmzv_string_free(report);

        let st = cycmzv_verify_relation(w, CycmzvRing::Acyc, false, 7, 31, &mut holds, ptr::null_mut());
        assert_eq!(st, CycmzvStatus::Ok);
        assert!(!holds);
        cycmzv_hpoly_free(w);

        let mut bad = ptr::null_mut();
        assert_eq!(cycmzv_hpoly_from_json(c("[").as_ptr(), &mut bad), CycmzvStatus::Parse);
    }
}

#[test]
fn dimensions_and_limits() {
    unsafe {
        let mut d = 0usize;
        assert_eq!(cycmzv_dimension_bound(5, &mut d), CycmzvStatus::Ok);
        assert_eq!(d, 4);
        assert_eq!(cycmzv_observed_dimension(3, 13, &mut d), CycmzvStatus::Ok);
        assert_eq!(d, 2);
        let (mut re, mut im, mut bar) = (0.0, 0.0, 0.0);
        let st = cycmzv_limit(c("2").as_ptr(), 1000, 2, 5, 128, false, &mut re, &mut im, &mut bar);
        assert_eq!(st, CycmzvStatus::Ok);
        assert!((re - std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-4 && im.abs() < 1e-4);
        let st = cycmzv_limit(c("2").as_ptr(), 10, 2, 3, 64, false, &mut re, &mut im, &mut bar);
        assert_eq!(st, CycmzvStatus::NotConverged);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(cycmzv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Directory holding the library artifacts for this test run.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cycmzv.h")).unwrap();
    for sym in [
        "cycmzv_z_exact",
        "cycmzv_elem_free",
        "cycmzv_verify_relation",
        "cycmzv_last_error",
        "cycmzv_string_free",
        "typedef struct CycmzvElem CycmzvElem",
        "CYCMZV_STATUS_OK = 0",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let dir = artifact_dir();
    let lib = dir.join("libcycmzv_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "cycmzv.h"
int main(void) {
    CycmzvElem *e = NULL;
    if (cycmzv_z_exact("3", 9, false, &e) != CYCMZV_STATUS_OK) return 1;
    char *json = NULL;
    if (cycmzv_elem_to_json(e, &json) != CYCMZV_STATUS_OK) return 2;
    printf("%s\n", json);
    cycmzv_string_free(json);
    cycmzv_elem_free(e);
    if (cycmzv_z_exact("x", 9, false, &e) != CYCMZV_STATUS_PARSE) return 3;
    printf("%s\n", cycmzv_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("C compiler available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with(r#"{"coeffs":"#) || stdout.contains(r#""n":9"#));
    assert!(stdout.contains("invalid index"));
}
