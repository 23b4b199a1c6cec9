use std::ffi::CStr;
use std::ptr;

use twocenter_ffi::*;

fn instance(xyz: &[f64]) -> *mut TcInstance {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { tc_instance_new(xyz.as_ptr(), xyz.len() / 3, &mut h) },
        TcStatus::Ok
    );
    h
}

const FOUR: [f64; 12] = [0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 10.0, 0.0, 0.0, 12.0, 0.0, 0.0];

#[test]
fn decide_three_ways() {
    let h = instance(&FOUR);
    assert_eq!(unsafe { tc_instance_len(h) }, 4);
    for (r, want) in [
        (1.0 - 1e-6, TcOutcome::NotCoverable),
        (1.0, TcOutcome::ExactlyCritical),
        (1.0 + 1e-6, TcOutcome::StrictlyCoverable),
    ] {
        let mut o = TcOutcome::NotCoverable;
        assert_eq!(
            unsafe { tc_decide(h, r, ptr::null(), &mut o) },
            TcStatus::Ok
        );
        assert_eq!(o, want);
    }
    unsafe { tc_instance_free(h) };
}

#[test]
fn solve_and_read_back() {
    let h = instance(&FOUR);
    let mut cfg = tc_config_default();
    cfg.algorithm = TcAlgorithm::Cubic;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tc_solve(h, &cfg, &mut s) }, TcStatus::Ok);
    assert!((unsafe { tc_solution_radius(s) } - 1.0).abs() < 1e-9);
    assert!(!unsafe { tc_solution_is_approximate(s) });
    let mut c = [0.0; 6];
    assert_eq!(
        unsafe { tc_solution_centers(s, c.as_mut_ptr()) },
        TcStatus::Ok
    );
    let mut xs = [c[0], c[3]];
    xs.sort_by(f64::total_cmp);
    assert!((xs[0] - 1.0).abs() < 1e-9 && (xs[1] - 11.0).abs() < 1e-9);
    let mut part = [9u8; 4];
    assert_eq!(
        unsafe { tc_solution_partition(s, part.as_mut_ptr(), 4) },
        TcStatus::Ok
    );
    assert_eq!(part[0], part[1]);
    assert_eq!(part[2], part[3]);
    assert_ne!(part[0], part[2]);
    assert_eq!(
        unsafe { tc_solution_partition(s, part.as_mut_ptr(), 3) },
        TcStatus::InvalidArgument
    );
    unsafe {
        tc_solution_free(s);
        tc_instance_free(h);
    }
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { tc_instance_new(ptr::null(), 3, &mut h) },
        TcStatus::NullPointer
    );
    assert_eq!(
        unsafe { tc_instance_new(FOUR.as_ptr(), 0, &mut h) },
        TcStatus::EmptyInput
    );
    let bad = [0.0, f64::NAN, 0.0];
    assert_eq!(
        unsafe { tc_instance_new(bad.as_ptr(), 1, &mut h) },
        TcStatus::InvalidArgument
    );
    let h = instance(&FOUR);
    let mut o = TcOutcome::NotCoverable;
    assert_eq!(
        unsafe { tc_decide(h, -1.0, ptr::null(), &mut o) },
        TcStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { tc_decide(ptr::null(), 1.0, ptr::null(), &mut o) },
        TcStatus::NullPointer
    );
    let mut cfg = tc_config_default();
    cfg.rho = 1;
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { tc_solve(h, &cfg, &mut s) },
        TcStatus::InvalidArgument
    );
    let msg = unsafe { CStr::from_ptr(tc_status_message(TcStatus::Degenerate)) };
    assert!(!msg.to_bytes().is_empty());
    unsafe {
        tc_instance_free(h);
        tc_instance_free(ptr::null_mut());
        tc_solution_free(ptr::null_mut());
    }
    assert!(unsafe { tc_solution_radius(ptr::null()) }.is_nan());
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/twocenter.h"))
            .unwrap();
    for name in [
        "tc_instance_new",
        "tc_instance_free",
        "tc_decide",
        "tc_solve",
        "tc_solution_free",
        "TC_STATUS_OK",
        "typedef struct TcInstance TcInstance",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
