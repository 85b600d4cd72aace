use std::ffi::{CStr, CString};
use std::ptr;

use gaugeproj_ffi::*;

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { gp_string_free(p) };
    s
}

fn last_error() -> String {
    take_string(gp_last_error_message())
}

#[test]
fn gauge_round_trip() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gp_gauge_power(0.5, &mut g) }, GpStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { gp_gauge_evaluate_log(g, 0.25f64.ln(), &mut v) }, GpStatus::Ok);
    assert!((v.exp() - 0.5).abs() < 1e-15);
    let (mut s, mut k) = (0.0, 0.0);
    assert_eq!(unsafe { gp_gauge_doubling(g, &mut s, &mut k) }, GpStatus::Ok);
    assert!((s - 0.5).abs() < 1e-12 && (k - 1.0).abs() < 1e-12);
    unsafe { gp_gauge_free(g) };
}

#[test]
fn errors_set_codes_and_messages() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gp_gauge_power(-1.0, &mut g) }, GpStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(last_error().contains("exponent"));
    gp_clear_last_error();
    assert!(gp_last_error_message().is_null());

    assert_eq!(unsafe { gp_gauge_power(0.5, ptr::null_mut()) }, GpStatus::NullPointer);
    let bad = CString::new(r#"{"family":"power","q":1}"#).unwrap();
    assert_eq!(unsafe { gp_gauge_from_json(bad.as_ptr(), &mut g) }, GpStatus::Config);
    assert!(last_error().contains("q"));

    let steep = CString::new(r#"{"family":"power","s":1.5}"#).unwrap();
    assert_eq!(unsafe { gp_gauge_from_json(steep.as_ptr(), &mut g) }, GpStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { gp_hierarchy_build(g, 3, 1_000_000, &mut h) }, GpStatus::Precondition);
    assert!(h.is_null());
    unsafe { gp_gauge_free(g) };
    unsafe { gp_gauge_free(ptr::null_mut()) };
    unsafe { gp_string_free(ptr::null_mut()) };
}

#[test]
fn integral_condition_codes() {
    let (mut f, mut g) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(gp_gauge_power(0.5, &mut f), GpStatus::Ok);
        assert_eq!(gp_gauge_power(0.25, &mut g), GpStatus::Ok);
        let (mut verdict, mut value) = (-1, 0.0);
        assert_eq!(gp_check_integral_condition(f, g, &mut verdict, &mut value), GpStatus::Ok);
        assert_eq!(verdict, GP_VERDICT_FINITE);
        assert!((value - 1.0).abs() < 1e-6, "{value}");
        assert_eq!(gp_check_integral_condition(f, f, &mut verdict, &mut value), GpStatus::Ok);
        assert_eq!(verdict, GP_VERDICT_DIVERGENT);
        gp_gauge_free(f);
        gp_gauge_free(g);
    }
}

#[test]
fn hierarchy_handle() {
    let mut f = ptr::null_mut();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(gp_gauge_power(0.5, &mut f), GpStatus::Ok);
        assert_eq!(gp_hierarchy_build(f, 3, 10_000_000, &mut h), GpStatus::Ok);
        assert_eq!(gp_hierarchy_depth(h), 3);
        assert_eq!(gp_hierarchy_depth(ptr::null()), 0);
        let mut n = 0;
        assert_eq!(gp_hierarchy_disc_count(h, 2, &mut n), GpStatus::Ok);
        assert_eq!(n, 81);
        assert_eq!(gp_hierarchy_disc_count(h, 9, &mut n), GpStatus::InvalidArgument);
        let (mut c, mut bad) = (0, 1);
        assert_eq!(gp_hierarchy_validate(h, &mut c, &mut bad), GpStatus::Ok);
        assert!(c > 0);
        assert_eq!(bad, 0);
        let mut s = ptr::null_mut();
        assert_eq!(gp_hierarchy_to_json(h, 1000, &mut s), GpStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
        assert_eq!(v["N"][0], 9);
        gp_hierarchy_free(h);
        gp_gauge_free(f);
    }
}

#[test]
fn pipeline_summary() {
    let cfg = CString::new(
        r#"{"f":{"family":"power","s":0.5},"depth":3,"angles":64,"frostman_samples":1000,"energy_pairs":2000,"projected_pairs":1000}"#,
    )
    .unwrap();
    let mut s = ptr::null_mut();
    let mut code = -1;
    assert_eq!(unsafe { gp_run_pipeline(cfg.as_ptr(), &mut s, &mut code) }, GpStatus::Ok);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
    assert_eq!(v["inequalities"]["fail"], 0);
    assert_eq!(v["schema_version"], 1);

    let bad = CString::new(r#"{"depth":0}"#).unwrap();
    assert_eq!(unsafe { gp_run_pipeline(bad.as_ptr(), &mut s, &mut code) }, GpStatus::Config);
    assert!(last_error().contains("depth"));
}
