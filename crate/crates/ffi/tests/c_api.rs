use std::ffi::{CStr, CString};
use std::ptr;

use jcas_ffi::*;

const TABLE3: &str = include_str!("../../core/channels/table3.json");
const TABLE2: &str = include_str!("../../core/channels/table2.json");

fn load(text: &str, mode: JcasMode) -> *mut JcasChannel {
    let json = CString::new(text).unwrap();
    let mut ch = ptr::null_mut();
    let status = unsafe { jcas_channel_from_json(json.as_ptr(), mode, &mut ch) };
    assert_eq!(status, JcasStatus::Ok);
    assert!(jcas_last_error().is_null());
    ch
}

fn last_error() -> String {
    let p = jcas_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn phi_matches_library() {
    let ch = load(TABLE3, JcasMode::BiStatic);
    let px = [0.3, 0.7];
    let mut v = 0.0;
    let status = unsafe { jcas_phi(ch, px.as_ptr(), px.len(), 1e-9, &mut v) };
    assert_eq!(status, JcasStatus::Ok);
    assert!((v - 0.0477116).abs() < 1e-6, "{v}");
    unsafe { jcas_channel_free(ch) };
}

#[test]
fn dims_and_symmetry() {
    let ch = load(TABLE2, JcasMode::MonoStatic);
    let (mut x, mut s) = (0usize, 0usize);
    let status = unsafe { jcas_channel_dims(ch, &mut x, ptr::null_mut(), ptr::null_mut(), &mut s) };
    assert_eq!(status, JcasStatus::Ok);
    assert_eq!((x, s), (2, 3));
    let mut sym = false;
    assert_eq!(unsafe { jcas_check_symmetry(ch, 1e-9, &mut sym) }, JcasStatus::Ok);
    assert!(sym);
    unsafe { jcas_channel_free(ch) };
}

#[test]
fn capacities() {
    let ch = load(TABLE3, JcasMode::BiStatic);
    let mut c = 0.0;
    let mut arg = [0.0; 2];
    assert_eq!(unsafe { jcas_compound_capacity(ch, 0, &mut c, arg.as_mut_ptr()) }, JcasStatus::Ok);
    assert!((c - 0.020135).abs() < 1e-5, "{c}");
    assert!((arg[0] + arg[1] - 1.0).abs() < 1e-12);
    let mut w = 0.0;
    assert_eq!(unsafe { jcas_worst_case_capacity(ch, &mut w) }, JcasStatus::Ok);
    assert!(w >= c - 1e-9);
    unsafe { jcas_channel_free(ch) };
}

#[test]
fn rho_kinds_are_ordered() {
    let ch = load(TABLE3, JcasMode::BiStatic);
    let px = [0.5, 0.5];
    let mut vals = [0.0; 3];
    for (kind, slot) in [JcasRhoKind::Successive, JcasRhoKind::JointLowerBound, JcasRhoKind::Joint]
        .into_iter()
        .zip(vals.iter_mut())
    {
        let status = unsafe { jcas_rho(ch, kind, px.as_ptr(), 2, 0.01, 30, slot) };
        assert_eq!(status, JcasStatus::Ok);
    }
    assert!(vals[0] <= vals[1] + 1e-6 && vals[1] <= vals[2] + 1e-6, "{vals:?}");
    unsafe { jcas_channel_free(ch) };
}

#[test]
fn region_curve_round_trip() {
    let ch = load(TABLE2, JcasMode::MonoStatic);
    let mut curve = ptr::null_mut();
    assert_eq!(unsafe { jcas_region_mono_open(ch, 0, &mut curve) }, JcasStatus::Ok);
    let n = unsafe { jcas_curve_len(curve) };
    assert!(n >= 1);
    let (mut e, mut r) = (0.0, 0.0);
    assert_eq!(unsafe { jcas_curve_point(curve, 0, &mut e, &mut r) }, JcasStatus::Ok);
    assert!(e.is_finite() && r >= 0.0);
    assert_eq!(unsafe { jcas_curve_point(curve, n, &mut e, &mut r) }, JcasStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { jcas_curve_to_csv(curve, &mut csv) }, JcasStatus::Ok);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_owned();
    assert!(text.contains("E_nats,R_nats"));
    unsafe {
        jcas_string_free(csv);
        jcas_curve_free(curve);
        jcas_channel_free(ch);
    }
}

#[test]
fn simulation_csv() {
    let ch = load(TABLE3, JcasMode::BiStatic);
    let p = [0.5, 0.5];
    let ns = [20usize, 40, 60];
    let mut fit = 0.0;
    let mut csv = ptr::null_mut();
    let status = unsafe { jcas_simulate_mono(ch, p.as_ptr(), 2, ns.as_ptr(), 3, 2000, 7, true, &mut fit, &mut csv) };
    assert_eq!(status, JcasStatus::Ok);
    assert!(fit.is_finite() && fit > 0.0);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_owned();
    assert_eq!(text.lines().count(), 4);
    unsafe {
        jcas_string_free(csv);
        jcas_channel_free(ch);
    }
}

#[test]
fn error_codes() {
    let bad = CString::new(r#"{"states":["a"],"w_y":[[[0.5,0.4]]]}"#).unwrap();
    let mut ch = ptr::null_mut();
    let status = unsafe { jcas_channel_from_json(bad.as_ptr(), JcasMode::BiStatic, &mut ch) };
    assert_eq!(status, JcasStatus::InvalidSpec);
    assert!(ch.is_null());
    assert!(!last_error().is_empty());

    let ok = load(TABLE3, JcasMode::BiStatic);
    let mut v = 0.0;
    assert_eq!(unsafe { jcas_phi(ok, ptr::null(), 2, 1e-9, &mut v) }, JcasStatus::NullPointer);
    assert_eq!(unsafe { jcas_phi(ptr::null(), [1.0, 0.0].as_ptr(), 2, 1e-9, &mut v) }, JcasStatus::NullPointer);
    let px = [0.5, 0.5];
    assert_eq!(unsafe { jcas_rho(ok, JcasRhoKind::Joint, px.as_ptr(), 2, -1.0, 0, &mut v) }, JcasStatus::InvalidArgument);
    unsafe { jcas_channel_free(ok) };

    let mut mono = ptr::null_mut();
    let t3 = CString::new(TABLE3).unwrap();
    let status = unsafe { jcas_channel_from_json(t3.as_ptr(), JcasMode::MonoStatic, &mut mono) };
    assert_eq!(status, JcasStatus::InvalidSpec);
    assert!(last_error().contains("w_z"));
}

#[test]
fn null_handles_are_ignored() {
    unsafe {
        jcas_channel_free(ptr::null_mut());
        jcas_curve_free(ptr::null_mut());
        jcas_string_free(ptr::null_mut());
        assert_eq!(jcas_curve_len(ptr::null()), 0);
    }
}
