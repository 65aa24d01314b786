use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ydof_ffi::*;

fn last_error() -> String {
    let p = ydof_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn region(c: [u32; 4]) -> *mut YdofRegion {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ydof_region_new(c[0], c[1], c[2], c[3], &mut r) }, YdofStatus::Ok);
    r
}

const ONES: [i64; 6] = [1; 6];

#[test]
fn region_membership_and_vertices() {
    let r = region([3, 2, 2, 4]);
    let mut inside = false;
    let d = [2, 0, 0, 2, 2, 0];
    assert_eq!(unsafe { ydof_region_contains(r, d.as_ptr(), ONES.as_ptr(), &mut inside) }, YdofStatus::Ok);
    assert!(inside);
    let d = [3, 0, 0, 0, 0, 0];
    assert_eq!(unsafe { ydof_region_contains(r, d.as_ptr(), ONES.as_ptr(), &mut inside) }, YdofStatus::Ok);
    assert!(!inside);

    let mut count = 0;
    assert_eq!(unsafe { ydof_region_vertex_count(r, &mut count) }, YdofStatus::Ok);
    let config = ydof::AntennaConfig::new(3, 2, 2, 4).unwrap();
    assert_eq!(count, ydof::region::enumerate_vertices(&ydof::region::build_region(&config)).len());
    let (mut num, mut den) = ([0i64; 6], [0i64; 6]);
    for i in 0..count {
        assert_eq!(unsafe { ydof_region_vertex(r, i, num.as_mut_ptr(), den.as_mut_ptr()) }, YdofStatus::Ok);
        assert_eq!(unsafe { ydof_region_contains(r, num.as_ptr(), den.as_ptr(), &mut inside) }, YdofStatus::Ok);
        assert!(inside);
    }
    assert_eq!(unsafe { ydof_region_vertex(r, count, num.as_mut_ptr(), den.as_mut_ptr()) }, YdofStatus::OutOfRange);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ydof_region_to_json(r, &mut json) }, YdofStatus::Ok);
    let text = unsafe { CString::from_raw(json) }.into_string().unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), count);
    unsafe { ydof_region_free(r) };
}

#[test]
fn invalid_arguments_set_status_and_message() {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ydof_region_new(0, 1, 1, 1, &mut r) }, YdofStatus::InvalidArgument);
    assert!(r.is_null());
    assert!(last_error().contains("antenna"));
    assert_eq!(unsafe { ydof_region_new(1, 1, 1, 1, ptr::null_mut()) }, YdofStatus::NullPointer);

    let r = region([1, 1, 1, 1]);
    let mut inside = false;
    let zero = [0i64; 6];
    assert_eq!(unsafe { ydof_region_contains(r, zero.as_ptr(), zero.as_ptr(), &mut inside) }, YdofStatus::InvalidArgument);
    let neg = [-1, 0, 0, 0, 0, 0];
    assert_eq!(unsafe { ydof_region_contains(r, neg.as_ptr(), ONES.as_ptr(), &mut inside) }, YdofStatus::InvalidArgument);
    assert_eq!(unsafe { ydof_region_contains(ptr::null(), zero.as_ptr(), ONES.as_ptr(), &mut inside) }, YdofStatus::NullPointer);
    unsafe {
        ydof_region_free(r);
        ydof_region_free(ptr::null_mut());
        ydof_plan_free(ptr::null_mut());
        ydof_string_free(ptr::null_mut());
    }
}

#[test]
fn plan_simulate_and_slope() {
    let r = region([2, 1, 2, 3]);
    let mut plan = ptr::null_mut();
    let d = [1, 1, 0, 1, 0, 0];
    assert_eq!(unsafe { ydof_plan_new(r, d.as_ptr(), ONES.as_ptr(), &mut plan) }, YdofStatus::Ok);
    let mut info = YdofPlanInfo::default();
    assert_eq!(unsafe { ydof_plan_info(plan, &mut info) }, YdofStatus::Ok);
    assert_eq!((info.case_label, info.t, info.j, info.gamma, info.total_streams), (2, 1, 3, 0, 3));

    let mut err = f64::NAN;
    assert_eq!(unsafe { ydof_simulate_noiseless(plan, 3, &mut err) }, YdofStatus::Ok);
    assert!(err < 1e-8);
    let mut mc = YdofMonteCarlo::default();
    assert_eq!(unsafe { ydof_monte_carlo_noiseless(plan, 8, 100, &mut mc) }, YdofStatus::Ok);
    assert_eq!((mc.trials, mc.successes), (8, 8));

    let grid = [40.0, 50.0, 60.0, 70.0];
    let mut slope = 0.0;
    assert_eq!(unsafe { ydof_rate_slope(plan, 1, grid.as_ptr(), grid.len(), &mut slope) }, YdofStatus::Ok);
    assert!((slope - 3.0).abs() < 0.3, "{slope}");
    assert_eq!(unsafe { ydof_rate_slope(plan, 1, grid.as_ptr(), 1, &mut slope) }, YdofStatus::InvalidArgument);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ydof_plan_to_json(plan, &mut json) }, YdofStatus::Ok);
    let parsed: ydof::planner::PatternPlan =
        serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(parsed.case, ydof::planner::CaseLabel::II);
    unsafe {
        ydof_string_free(json);
        ydof_plan_free(plan);
        ydof_region_free(r);
    }
}

#[test]
fn outside_tuple_names_the_bound() {
    let r = region([2, 1, 1, 3]);
    let mut plan = ptr::null_mut();
    let d = [1, 1, 0, 1, 0, 0];
    assert_eq!(unsafe { ydof_plan_new(r, d.as_ptr(), ONES.as_ptr(), &mut plan) }, YdofStatus::NotInRegion);
    assert!(plan.is_null());
    assert!(last_error().starts_with("outside the DoF region: violates sink bound of user 3"), "{}", last_error());
    unsafe { ydof_region_free(r) };
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(ydof_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Directory holding the built library artifacts (`target/<profile>`).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include").join("ydof.h");
    assert!(header.exists(), "header not generated");
    let lib = artifact_dir().join("libydof_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no C compiler or static library");
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ydof_smoke");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(manifest.join("tests").join("c").join("smoke.c"))
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
