use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use uniformity_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ul_last_error()) }.to_string_lossy().into_owned()
}

fn indicator(lo: i64, hi: i64) -> *mut UlFunction {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { ul_function_indicator(lo, hi, &mut f) }, UlStatus::Ok);
    f
}

#[test]
fn function_round_trip() {
    let re = [0.5, 0.0, -1.0];
    let im = [0.5, 1.0, 0.0];
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(ul_function_new(3, re.as_ptr(), im.as_ptr(), 3, &mut f), UlStatus::Ok);
        let (mut len, mut off) = (0usize, 0i64);
        assert_eq!(ul_function_len(f, &mut len), UlStatus::Ok);
        assert_eq!(ul_function_offset(f, &mut off), UlStatus::Ok);
        assert_eq!((len, off), (3, 3));
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(ul_function_eval(f, 4, &mut a, &mut b), UlStatus::Ok);
        assert_eq!((a, b), (0.0, 1.0));
        assert_eq!(ul_function_eval(f, 100, &mut a, &mut b), UlStatus::Ok);
        assert_eq!((a, b), (0.0, 0.0));
        ul_function_free(f);
    }
}

#[test]
fn null_pointers_and_bad_arguments_are_reported() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(ul_gowers_norm(ptr::null(), 2, &mut out), UlStatus::NullPointer);
        assert!(last_error().contains("null"));
        let f = indicator(1, 11);
        assert_eq!(ul_gowers_norm(f, 9, &mut out), UlStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(ul_function_indicator(5, 5, &mut ptr::null_mut()), UlStatus::InvalidArgument);
        assert_eq!(ul_gowers_norm(f, 2, ptr::null_mut()), UlStatus::NullPointer);
        ul_function_free(f);
        ul_function_free(ptr::null_mut());
        ul_local_function_free(ptr::null_mut());
    }
}

#[test]
fn norms_and_counting() {
    unsafe {
        let f = indicator(1, 21);
        let mut norm = 0.0;
        assert_eq!(ul_gowers_norm(f, 1, &mut norm), UlStatus::Ok);
        assert!((norm - 20.0).abs() < 1e-12);
        assert_eq!(ul_gowers_norm_on_class(f, 0, 2, 1, &mut norm), UlStatus::Ok);
        assert!((norm - 10.0).abs() < 1e-12);
        assert_eq!(ul_gowers_norm_on_class(f, 0, 0, 1, &mut norm), UlStatus::InvalidArgument);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(ul_lambda(1, 20, f, f, f, &mut re, &mut im), UlStatus::Ok);
        // Λ(1,1,1) counts configurations in [20] over N M = 20 * 4
        let mut count = 0u64;
        let all: Vec<i64> = (1..=20).collect();
        assert_eq!(ul_count_configs(1, 20, all.as_ptr(), all.len(), &mut count), UlStatus::Ok);
        assert!((re - count as f64 / 80.0).abs() < 1e-12);
        assert_eq!(im, 0.0);

        let mut dual = ptr::null_mut();
        assert_eq!(ul_dual_function(1, 20, f, f, &mut dual), UlStatus::Ok);
        let mut len = 0usize;
        assert_eq!(ul_function_len(dual, &mut len), UlStatus::Ok);
        assert!(len > 0);
        ul_function_free(dual);

        let bad = [0i64];
        assert_eq!(ul_count_configs(1, 20, bad.as_ptr(), 1, &mut count), UlStatus::InvalidArgument);
        ul_function_free(f);
    }
}

#[test]
fn search_and_denominators() {
    unsafe {
        let mut set = [0i64; 6];
        let mut size = 0usize;
        assert_eq!(ul_max_free_set(1, 6, false, set.as_mut_ptr(), 6, &mut size), UlStatus::Ok);
        assert_eq!(size, 3);
        assert_eq!(ul_max_free_set(1, 6, false, set.as_mut_ptr(), 1, &mut size), UlStatus::InvalidArgument);
        assert_eq!(ul_max_free_set(1, 41, false, ptr::null_mut(), 0, &mut size), UlStatus::InvalidArgument);

        let (mut q, mut a, mut err) = (0u64, 0i64, 0.0);
        assert_eq!(ul_best_denominator(2f64.sqrt() - 1.0, 100, &mut q, &mut a, &mut err), UlStatus::Ok);
        assert_eq!((q, a), (70, 29));
        assert!(err < 1.0 / 70.0);
        assert_eq!(ul_best_denominator(0.3, 0, &mut q, &mut a, &mut err), UlStatus::InvalidArgument);
        assert_eq!(ul_best_denominator(f64::NAN, 5, &mut q, &mut a, &mut err), UlStatus::InvalidArgument);
    }
}

#[test]
fn extraction_round_trip() {
    unsafe {
        let n = 64;
        let one = indicator(1, n + 1);
        let mut phi = ptr::null_mut();
        let mut corr = 0.0;
        let status = ul_extract_correlating_local(1, n as u64, 0.5, one, one, one, &mut phi, &mut corr);
        assert_eq!(status, UlStatus::Ok, "{}", last_error());
        assert!(corr > 0.0);
        let (mut m, mut res) = (0u64, 0u64);
        assert_eq!(ul_local_function_modulus(phi, &mut m), UlStatus::Ok);
        assert_eq!(ul_local_function_resolution(phi, &mut res), UlStatus::Ok);
        assert!(m >= 1 && res >= 1);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(ul_local_function_eval(phi, 5, &mut a, &mut b), UlStatus::Ok);
        assert!((a * a + b * b).sqrt() <= 1.0 + 1e-12);
        ul_local_function_free(phi);

        // f = 0 has nothing to correlate with
        let zero_re = [0.0];
        let mut zero = ptr::null_mut();
        assert_eq!(ul_function_new(1, zero_re.as_ptr(), ptr::null(), 1, &mut zero), UlStatus::Ok);
        let mut phi = ptr::null_mut();
        let status = ul_extract_correlating_local(1, n as u64, 0.5, zero, one, one, &mut phi, &mut corr);
        assert_eq!(status, UlStatus::ExtractionFailed);
        assert!(phi.is_null());
        assert!(last_error().contains("assembly"));
        ul_function_free(zero);
        ul_function_free(one);
    }
}

#[test]
fn json_file_loading() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(&path, r#"[{"x": 2, "re": 1.0}, {"x": 4, "re": 0.0, "im": -1.0}]"#).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(ul_function_from_json_file(c.as_ptr(), &mut f), UlStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(ul_function_eval(f, 4, &mut a, &mut b), UlStatus::Ok);
        assert_eq!((a, b), (0.0, -1.0));
        ul_function_free(f);
        let missing = CString::new("/definitely/not/here.json").unwrap();
        assert_eq!(ul_function_from_json_file(missing.as_ptr(), &mut f), UlStatus::Io);
        std::fs::write(&path, "not json").unwrap();
        assert_eq!(ul_function_from_json_file(c.as_ptr(), &mut f), UlStatus::Io);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("uniformity_lab.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    assert!(text.contains("#pragma once"));
    for name in [
        "ul_last_error",
        "ul_function_new",
        "ul_function_indicator",
        "ul_function_from_json_file",
        "ul_function_free",
        "ul_function_len",
        "ul_function_offset",
        "ul_function_eval",
        "ul_gowers_norm",
        "ul_gowers_norm_on_class",
        "ul_lambda",
        "ul_dual_function",
        "ul_count_configs",
        "ul_max_free_set",
        "ul_best_denominator",
        "ul_extract_correlating_local",
        "ul_local_function_eval",
        "ul_local_function_free",
        "ul_local_function_modulus",
        "ul_local_function_resolution",
    ] {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    for variant in ["UL_STATUS_OK = 0", "UL_STATUS_NULL_POINTER", "UL_STATUS_PANIC"] {
        assert!(text.contains(variant), "{variant} missing from header");
    }
    assert!(text.contains("typedef struct UlFunction UlFunction;"));
}

/// `target/<profile>`, found from the test binary at `target/<profile>/deps/`.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "uniformity_lab.h"

int main(void) {
    UlFunction *f = NULL;
    if (ul_function_indicator(1, 21, &f) != UL_STATUS_OK) return 1;
    double norm = 0.0;
    if (ul_gowers_norm(f, 2, &norm) != UL_STATUS_OK) return 2;
    if (ul_gowers_norm(NULL, 2, &norm) != UL_STATUS_NULL_POINTER) return 3;
    if (ul_last_error()[0] == '\0') return 4;
    uint64_t q = 0; int64_t a = 0; double err = 0.0;
    if (ul_best_denominator(0.25, 10, &q, &a, &err) != UL_STATUS_OK || q != 4 || a != 1) return 5;
    ul_function_free(f);
    printf("%.6f\n", norm);
    return 0;
}
"#;

#[test]
fn c_compiler_accepts_header_and_links() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile as C99");

    let lib = profile_dir().join("libuniformity_lab_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link step", lib.display());
        return;
    }
    let exe = dir.path().join("main");
    let status = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "linking against the static library failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    // ‖1_[20]‖⁴_{U²} = Σ_h (20 - |h|)² = 5340
    let norm: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((norm - 5340f64.powf(0.25)).abs() < 1e-5);
}

fn which_cc() -> Result<String, ()> {
    for cand in ["cc", "gcc", "clang"] {
        if Command::new(cand).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cand.to_string());
        }
    }
    Err(())
}
