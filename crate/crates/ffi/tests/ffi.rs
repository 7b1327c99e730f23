use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ofw_ffi::*;

fn last_error() -> String {
    let p = ofw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn ball_queries() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(ofw_set_ball([0.0, 0.0].as_ptr(), 2, 1.0, &mut set), OfwStatus::Ok);
        assert!(ofw_last_error_message().is_null());

        let mut v = [0.0; 2];
        assert_eq!(ofw_set_lmo(set, [3.0, 4.0].as_ptr(), 2, v.as_mut_ptr()), OfwStatus::Ok);
        assert_eq!(v, [-0.6, -0.8]);

        assert_eq!(ofw_set_project(set, [3.0, 4.0].as_ptr(), 2, v.as_mut_ptr()), OfwStatus::Ok);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15, "{v:?}");

        let mut inside = false;
        assert_eq!(ofw_set_contains(set, [0.5, 0.5].as_ptr(), 2, 0.0, &mut inside), OfwStatus::Ok);
        assert!(inside);

        let mut r = 0.0;
        assert_eq!(ofw_set_interior_radius(set, [0.5, 0.0].as_ptr(), 2, &mut r), OfwStatus::Ok);
        assert_eq!(r, 0.5);

        let (mut d, mut n) = (0.0, 0usize);
        assert_eq!(ofw_set_diameter(set, &mut d), OfwStatus::Ok);
        assert_eq!(ofw_set_dimension(set, &mut n), OfwStatus::Ok);
        assert_eq!((d, n), (2.0, 2));

        assert_eq!(ofw_set_lmo(set, [1.0, 0.0, 0.0].as_ptr(), 3, v.as_mut_ptr()), OfwStatus::DimensionMismatch);
        assert!(last_error().contains("expected 2"));
        ofw_set_free(set);
    }
}

#[test]
fn polytope_constructors() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(ofw_set_simplex(3, &mut set), OfwStatus::Ok);
        let mut v = [0.0; 3];
        assert_eq!(ofw_set_lmo(set, [0.3, -1.0, 0.2].as_ptr(), 3, v.as_mut_ptr()), OfwStatus::Ok);
        assert_eq!(v, [0.0, 1.0, 0.0]);
        ofw_set_free(set);

        assert_eq!(ofw_set_l1_ball(2, 2.0, &mut set), OfwStatus::Ok);
        ofw_set_free(set);
        assert_eq!(ofw_set_box([0.0, 0.0].as_ptr(), [1.0, 2.0].as_ptr(), 2, &mut set), OfwStatus::Ok);
        ofw_set_free(set);

        assert_eq!(ofw_set_simplex(1, &mut set), OfwStatus::InvalidArgument);
        assert_eq!(ofw_set_ball([0.0].as_ptr(), 1, -1.0, &mut set), OfwStatus::InvalidArgument);
        assert_eq!(ofw_set_ball(ptr::null(), 2, 1.0, &mut set), OfwStatus::NullPointer);
        assert_eq!(ofw_set_simplex(3, ptr::null_mut()), OfwStatus::NullPointer);
        ofw_set_free(ptr::null_mut());
    }
}

#[test]
fn step_rules() {
    unsafe {
        let mut s = f64::NAN;
        let st = ofw_line_search_sigma([1.0, 0.0].as_ptr(), [1.0, 0.0].as_ptr(), [-1.0, 0.0].as_ptr(), 2, 1.0, &mut s);
        assert_eq!(st, OfwStatus::Ok);
        assert_eq!(s, 0.5);
        let st = ofw_line_search_sigma([1.0].as_ptr(), [0.0].as_ptr(), [1.0].as_ptr(), 1, 0.0, &mut s);
        assert_eq!(st, OfwStatus::ContractViolation);

        let (mut k, mut c) = (0usize, 0.0);
        assert_eq!(ofw_compute_k(1.0, 1.0, 1.0, 1.0, 1.0, &mut k, &mut c), OfwStatus::Ok);
        assert_eq!((k, c), (5, 0.75));
        assert_eq!(ofw_compute_k(1.0, 2.0, 1.0, 1.0, 1.0, &mut k, &mut c), OfwStatus::ContractViolation);
    }
}

const CONFIG: &str = r#"
seed = 2
horizons = [20, 40]

[[scenario]]
id = "s"
set = { kind = "ball", dimension = 2, radius = 1.0 }
stream = { family = "drifting-quadratic", alpha = 1.0, center = [0.5, 0.0] }

[[scenario.learner]]
id = "ls"
kind = "ofw-linesearch"
"#;

#[test]
fn experiment_round_trip() {
    unsafe {
        let text = CString::new(CONFIG).unwrap();
        let mut exp = ptr::null_mut();
        assert_eq!(ofw_experiment_parse(text.as_ptr(), &mut exp), OfwStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(ofw_experiment_run(exp, &mut res), OfwStatus::Ok);
        let mut n = 0;
        assert_eq!(ofw_results_len(res, &mut n), OfwStatus::Ok);
        assert_eq!(n, 2);
        let mut regret = f64::NAN;
        assert_eq!(ofw_results_regret(res, 0, &mut regret), OfwStatus::Ok);
        assert!(regret >= 0.0);
        assert_eq!(ofw_results_regret(res, 2, &mut regret), OfwStatus::IndexOutOfRange);

        let mut csv = ptr::null_mut();
        assert_eq!(ofw_results_to_csv(res, &mut csv), OfwStatus::Ok);
        let body = CStr::from_ptr(csv).to_str().unwrap().to_string();
        assert_eq!(body.lines().count(), 3);
        assert!(body.lines().nth(1).unwrap().starts_with("s,ls,20,"));
        ofw_string_free(csv);
        ofw_results_free(res);
        ofw_experiment_free(exp);

        let bad = CString::new(CONFIG.replace("seed = 2", "seed = 2\nbogus = 1")).unwrap();
        assert_eq!(ofw_experiment_parse(bad.as_ptr(), &mut exp), OfwStatus::ConfigError);
        assert!(last_error().contains("bogus"));
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ofw.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "ofw_last_error_message",
        "ofw_set_ball",
        "ofw_set_box",
        "ofw_set_simplex",
        "ofw_set_l1_ball",
        "ofw_set_free",
        "ofw_set_lmo",
        "ofw_set_project",
        "ofw_set_contains",
        "ofw_set_interior_radius",
        "ofw_line_search_sigma",
        "ofw_compute_k",
        "ofw_experiment_parse",
        "ofw_experiment_run",
        "ofw_results_len",
        "ofw_results_regret",
        "ofw_results_to_csv",
        "ofw_string_free",
        "typedef struct OfwSet OfwSet",
        "OFW_STATUS_DIMENSION_MISMATCH = 3",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_CLIENT: &str = r#"
#include <stdio.h>
#include "ofw.h"

int main(void) {
    OfwSet *set = NULL;
    double center[2] = {0.0, 0.0}, g[2] = {3.0, 4.0}, v[2];
    if (ofw_set_ball(center, 2, 1.0, &set) != OFW_STATUS_OK) return 1;
    if (ofw_set_lmo(set, g, 2, v) != OFW_STATUS_OK) return 2;
    if (ofw_set_lmo(set, g, 3, v) != OFW_STATUS_DIMENSION_MISMATCH) return 3;
    if (ofw_last_error_message() == NULL) return 4;
    size_t k = 0;
    double c = 0.0;
    if (ofw_compute_k(1.0, 1.0, 1.0, 1.0, 1.0, &k, &c) != OFW_STATUS_OK) return 5;
    printf("%.17g %.17g %zu %.17g\n", v[0], v[1], k, c);
    ofw_set_free(set);
    return 0;
}
"#;

#[test]
fn c_client_links_against_static_library() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libofw_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, C_CLIENT).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "client exited with {}", out.status);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "-0.59999999999999998 -0.80000000000000004 5 0.75");
}
