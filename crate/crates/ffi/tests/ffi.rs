use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use bco_core::envs::{io, make_switching_env, FamilyKind};
use bco_core::geometry::DomainSpec;
use bco_core::random::{stream, StreamId};
use bco_ffi::*;

fn last_error() -> String {
    unsafe {
        let n = bco_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; n];
        bco_last_error_message(buf.as_mut_ptr(), n);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn new_tewa(dim: usize, horizon: u64, b: u64) -> *mut BcoTewa {
    let mut h = ptr::null_mut();
    let st = unsafe { bco_tewa_new(dim, horizon, b, 0.0, BcoDomain::Ball, 1.0, 7, &mut h) };
    assert_eq!(st, BcoStatus::Ok, "{}", last_error());
    h
}

#[test]
fn learner_loop_reduces_a_quadratic() {
    let horizon = 4000u64;
    let h = new_tewa(2, horizon, horizon);
    let target = [0.3, -0.2];
    let loss = |z: &[f64]| 0.5 * z.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let mut z = [0.0; 2];
    let (mut early, mut late) = (0.0, 0.0);
    for t in 0..horizon {
        unsafe {
            assert_eq!(bco_tewa_next_query(h, z.as_mut_ptr(), 2), BcoStatus::Ok);
            assert!(z[0].hypot(z[1]) <= 1.0 + 1e-9);
            assert_eq!(bco_tewa_feed(h, loss(&z)), BcoStatus::Ok);
        }
        if t < 200 {
            early += loss(&z);
        } else if t >= horizon - 200 {
            late += loss(&z);
        }
    }
    assert!(late < early, "late {late} vs early {early}");
    let mut rounds = 0;
    let mut x = [0.0; 2];
    unsafe {
        assert_eq!(bco_tewa_rounds(h, &mut rounds), BcoStatus::Ok);
        assert_eq!(bco_tewa_meta_action(h, x.as_mut_ptr(), 2), BcoStatus::Ok);
        assert_eq!(bco_tewa_next_query(h, z.as_mut_ptr(), 2), BcoStatus::InvalidState);
        bco_tewa_free(h);
    }
    assert_eq!(rounds, horizon);
    assert!(x.iter().all(|v| v.is_finite()));
}

#[test]
fn misuse_reports_status_codes_and_messages() {
    let mut z = [0.0; 3];
    unsafe {
        assert_eq!(bco_tewa_next_query(ptr::null_mut(), z.as_mut_ptr(), 3), BcoStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(bco_tewa_new(2, 10, 4, 0.0, BcoDomain::Ball, 1.0, 0, ptr::null_mut()), BcoStatus::NullPointer);
        let mut h = ptr::null_mut();
        assert_eq!(bco_tewa_new(2, 10, 40, 0.0, BcoDomain::Cube, 1.0, 0, &mut h), BcoStatus::InvalidArgument);
        assert!(h.is_null());
        assert_eq!(bco_tewa_new(2, 10, 4, 0.0, BcoDomain::Ball, -1.0, 0, &mut h), BcoStatus::InvalidArgument);

        let h = new_tewa(3, 10, 4);
        assert_eq!(bco_tewa_feed(h, 0.5), BcoStatus::InvalidState);
        assert!(last_error().contains("no pending query"));
        assert_eq!(bco_tewa_next_query(h, z.as_mut_ptr(), 2), BcoStatus::InvalidArgument);
        assert_eq!(bco_tewa_next_query(h, z.as_mut_ptr(), 3), BcoStatus::Ok);
        assert!(last_error().is_empty());
        assert_eq!(bco_tewa_next_query(h, z.as_mut_ptr(), 3), BcoStatus::InvalidState);
        assert_eq!(bco_tewa_feed(h, f64::NAN), BcoStatus::InvalidArgument);
        assert_eq!(bco_tewa_feed(h, 0.1), BcoStatus::Ok);
        bco_tewa_free(h);
        bco_tewa_free(ptr::null_mut());
        let s = CStr::from_ptr(bco_status_string(BcoStatus::OutOfDomain));
        assert_eq!(s.to_str().unwrap(), "out of domain");
    }
}

#[test]
fn environments_load_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    let dom = DomainSpec::unit_ball(2);
    let env = make_switching_env(100, 3, FamilyKind::Quadratic, &dom, &mut stream(4, StreamId::Environment)).unwrap();
    io::export(&env, &path).unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(bco_env_load(c_path.as_ptr(), &mut e), BcoStatus::Ok);
        let (mut horizon, mut dim) = (0u64, 0usize);
        assert_eq!(bco_env_shape(e, &mut horizon, &mut dim), BcoStatus::Ok);
        assert_eq!((horizon, dim), (100, 2));

        let mut m = [0.0; 2];
        assert_eq!(bco_env_minimizer(e, 50, m.as_mut_ptr(), 2), BcoStatus::Ok);
        assert_eq!(&m[..], env.minimizer(50).unwrap().coords());
        let mut v = f64::NAN;
        assert_eq!(bco_env_eval(e, 50, m.as_ptr(), 2, &mut v), BcoStatus::Ok);
        assert!((v - env.min_value(50).unwrap()).abs() < 1e-15);

        let outside = [2.0, 0.0];
        assert_eq!(bco_env_eval(e, 50, outside.as_ptr(), 2, &mut v), BcoStatus::OutOfDomain);
        assert_eq!(bco_env_eval(e, 101, m.as_ptr(), 2, &mut v), BcoStatus::OutOfDomain);
        assert_eq!(bco_env_eval(e, 50, m.as_ptr(), 3, &mut v), BcoStatus::InvalidArgument);
        bco_env_free(e);

        let missing = CString::new(dir.path().join("none.json").to_str().unwrap()).unwrap();
        assert_eq!(bco_env_load(missing.as_ptr(), &mut e), BcoStatus::Io);
        std::fs::write(&path, "{ not json").unwrap();
        assert_eq!(bco_env_load(c_path.as_ptr(), &mut e), BcoStatus::Parse);
        assert!(e.is_null());
    }
}

#[test]
fn whole_runs_from_config_text() {
    let dir = tempfile::tempdir().unwrap();
    let csv = CString::new(dir.path().join("out.csv").to_str().unwrap()).unwrap();
    let cfg = CString::new("T = 500\nenv = switching\nalgo.S = 2\nseed = 5\n").unwrap();
    let mut regret = f64::NAN;
    unsafe {
        assert_eq!(bco_run_config(cfg.as_ptr(), csv.as_ptr(), &mut regret), BcoStatus::Ok, "{}", last_error());
    }
    assert!(regret.is_finite() && regret > 0.0);
    assert!(dir.path().join("out.json").exists());
    let lines = std::fs::read_to_string(dir.path().join("out.csv")).unwrap().lines().count();
    assert_eq!(lines, 501);

    let mut again = f64::NAN;
    unsafe {
        assert_eq!(bco_run_config(cfg.as_ptr(), ptr::null(), &mut again), BcoStatus::Ok);
    }
    assert_eq!(regret, again);

    let bad_syntax = CString::new("T 500\n").unwrap();
    let unknown = CString::new("colour = red\n").unwrap();
    let no_budget = CString::new("env = switching\n").unwrap();
    unsafe {
        assert_eq!(bco_run_config(bad_syntax.as_ptr(), ptr::null(), ptr::null_mut()), BcoStatus::Parse);
        assert_eq!(bco_run_config(unknown.as_ptr(), ptr::null(), ptr::null_mut()), BcoStatus::InvalidArgument);
        assert!(last_error().contains("colour"));
        assert_eq!(bco_run_config(no_budget.as_ptr(), ptr::null(), ptr::null_mut()), BcoStatus::InvalidArgument);
        assert_eq!(bco_run_config(ptr::null(), ptr::null(), ptr::null_mut()), BcoStatus::NullPointer);
    }
}

#[test]
fn generated_header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bco.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "bco_tewa_new",
        "bco_tewa_next_query",
        "bco_tewa_feed",
        "bco_tewa_free",
        "bco_env_load",
        "bco_env_eval",
        "bco_env_minimizer",
        "bco_env_free",
        "bco_run_config",
        "bco_last_error_message",
        "BCO_STATUS_OUT_OF_DOMAIN",
        "typedef struct BcoTewa BcoTewa",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // a C compiler is optional on build machines
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).output()
        else {
            continue;
        };
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
