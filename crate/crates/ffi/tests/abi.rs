use relpow_ffi::*;
use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

fn instance_path(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = relpow_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pencil_resolvent_round_trip() {
    // B = diag(1, 0), L = -I
    let b = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let l = [-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0];
    let mut rel = ptr::null_mut();
    unsafe {
        assert_eq!(relpow_relation_from_pencil(2, b.as_ptr(), l.as_ptr(), &mut rel), RelpowStatus::Ok);
        let mut n = 0;
        assert_eq!(relpow_relation_dim(rel, &mut n), RelpowStatus::Ok);
        assert_eq!(n, 2);
        let mut out = [0.0; 8];
        assert_eq!(relpow_c_resolvent(rel, ptr::null(), 1.0, 0.0, out.as_mut_ptr()), RelpowStatus::Ok);
        let want = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(out.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{out:?}");
        assert_eq!(
            relpow_c_resolvent(rel, ptr::null(), -1.0, 0.0, out.as_mut_ptr()),
            RelpowStatus::NotInResolventSet
        );
        assert!(last_error().contains("not in C-resolvent set"));
        relpow_relation_free(rel);
    }
}

#[test]
fn powers_and_semigroup_on_loaded_instance() {
    let path = instance_path("diag.json");
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(relpow_instance_load(path.as_ptr(), &mut inst), RelpowStatus::Ok);
        let mut out = [0.0; 8];
        for route in [RelpowRoute::Contour, RelpowRoute::Balakrishnan, RelpowRoute::Moment] {
            let st = relpow_neg_power(inst, 0.5, 0.0, route as u32, 1, 1e-9, out.as_mut_ptr());
            assert_eq!(st, RelpowStatus::Ok);
            assert!((out[0] - 1.0).abs() < 1e-7 && (out[6] - 0.5).abs() < 1e-7, "{route:?} {out:?}");
        }
        assert_eq!(relpow_neg_power(inst, 0.5, 0.0, 7, 1, 1e-9, out.as_mut_ptr()), RelpowStatus::InvalidParams);
        assert_eq!(relpow_neg_power(inst, -0.5, 0.0, 0, 1, 1e-9, out.as_mut_ptr()), RelpowStatus::RouteDomain);
        assert_eq!(relpow_semigroup(inst, 0.5, 1.0, 0.0, 1e-10, out.as_mut_ptr()), RelpowStatus::Ok);
        assert!((out[0] - (-1f64).exp()).abs() < 1e-8 && (out[6] - (-2f64).exp()).abs() < 1e-8);
        assert_eq!(relpow_semigroup(inst, 0.9, 1.0, 0.0, 1e-10, out.as_mut_ptr()), RelpowStatus::InvalidParams);
        let (mut res, mut pass) = (0.0, false);
        let id = CString::new("resolvent_eq").unwrap();
        assert_eq!(relpow_verify(inst, id.as_ptr(), 3, false, &mut res, &mut pass), RelpowStatus::Ok);
        assert!(pass && res < 1e-8);
        let bad = CString::new("nope").unwrap();
        assert_eq!(relpow_verify(inst, bad.as_ptr(), 3, false, &mut res, &mut pass), RelpowStatus::UnknownIdentity);
        relpow_instance_free(inst);
    }
}

#[test]
fn null_and_malformed_inputs() {
    let mut rel = ptr::null_mut();
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(relpow_relation_from_matrix(2, ptr::null(), &mut rel), RelpowStatus::NullPointer);
        let mut n = 0;
        assert_eq!(relpow_relation_dim(ptr::null(), &mut n), RelpowStatus::NullPointer);
        let bad = CString::new("{\"relation\": 3}").unwrap();
        assert_eq!(relpow_instance_from_json(bad.as_ptr(), &mut inst), RelpowStatus::Parse);
        assert!(inst.is_null());
        let missing = CString::new("/no/such/file.json").unwrap();
        assert_eq!(relpow_instance_load(missing.as_ptr(), &mut inst), RelpowStatus::Io);
        relpow_relation_free(ptr::null_mut());
        relpow_instance_free(ptr::null_mut());
    }
    // success clears the message
    let a = [-1.0, 0.0];
    assert_eq!(unsafe { relpow_relation_from_matrix(1, a.as_ptr(), &mut rel) }, RelpowStatus::Ok);
    assert!(relpow_last_error().is_null());
    unsafe { relpow_relation_free(rel) };
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/relpow.h");
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let st = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).status();
        match st {
            Ok(s) => assert!(s.success(), "{cc} rejected the header"),
            Err(e) => eprintln!("skipping {cc}: {e}"),
        }
    }
}
