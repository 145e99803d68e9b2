use std::ffi::{c_char, CStr, CString};
use std::ptr;

use stochwave_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        sw_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(sw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn path_round_trip() {
    unsafe {
        let text = CString::new("nx = 32\nhorizon = 0.25\n").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(sw_config_parse(text.as_ptr(), &mut cfg), SwStatus::Ok);
        let mut path = ptr::null_mut();
        assert_eq!(sw_run_path(cfg, 0.5, 7, &mut path), SwStatus::Ok);
        let mut s = std::mem::zeroed::<SwPathSummary>();
        assert_eq!(sw_path_summary(path, &mut s), SwStatus::Ok);
        assert_eq!((s.seed, s.alpha), (7, 0.5));
        assert!(!s.invalid);

        let mut count = 0usize;
        assert_eq!(sw_path_minima(path, ptr::null_mut(), 0, &mut count), SwStatus::Ok);
        assert!(count > 0);
        let mut buf = vec![0.0; count];
        let mut written = 0usize;
        assert_eq!(sw_path_minima(path, buf.as_mut_ptr(), count, &mut written), SwStatus::Ok);
        assert_eq!(written, count);
        let min = buf.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, s.min_over_run);

        sw_path_free(path);
        sw_config_free(cfg);
    }
}

#[test]
fn sweep_rows() {
    unsafe {
        let text = CString::new("nx = 32\nhorizon = 0.25\nn_paths = 10\n").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(sw_config_parse(text.as_ptr(), &mut cfg), SwStatus::Ok);
        let alphas = [0.5, 1.0, 4.0];
        assert_eq!(sw_config_set_alpha_list(cfg, alphas.as_ptr(), alphas.len()), SwStatus::Ok);
        let mut sweep = ptr::null_mut();
        assert_eq!(sw_run_sweep(cfg, 1, &mut sweep), SwStatus::Ok);
        assert_eq!(sw_sweep_len(sweep), 3);
        let mut row = std::mem::zeroed::<SwSweepRow>();
        for (i, &a) in alphas.iter().enumerate() {
            assert_eq!(sw_sweep_row(sweep, i, &mut row), SwStatus::Ok);
            assert_eq!((row.alpha, row.n_paths), (a, 10));
            assert!(row.ci_lo <= row.p_hat && row.p_hat <= row.ci_hi);
        }
        assert_eq!(sw_sweep_row(sweep, 3, &mut row), SwStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        sw_sweep_free(sweep);
        sw_config_free(cfg);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new("no_such_key = 1\n").unwrap();
        assert_eq!(sw_config_parse(bad.as_ptr(), &mut cfg), SwStatus::Config);
        assert!(cfg.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(sw_config_parse(ptr::null(), ptr::null_mut()), SwStatus::NullPointer);
        assert_eq!(last_error(), "out is null");

        let mut x = 0.0;
        assert_eq!(sw_circle_kernel(-1.0, 0.0, 1.0, &mut x), SwStatus::Domain);

        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(sw_wilson_interval(5, 3, &mut lo, &mut hi), SwStatus::Domain);

        assert_eq!(sw_config_parse(ptr::null(), &mut cfg), SwStatus::Ok);
        assert_eq!(sw_config_set_n_paths(cfg, 0), SwStatus::Config);
        assert_eq!(sw_config_set_alpha_list(cfg, [].as_ptr(), 0), SwStatus::Config);
        assert_eq!(sw_config_set_alpha_list(cfg, [-1.0].as_ptr(), 1), SwStatus::Config);
        sw_config_free(cfg);

        sw_config_free(ptr::null_mut());
        sw_path_free(ptr::null_mut());
        sw_sweep_free(ptr::null_mut());
        assert_eq!(sw_sweep_len(ptr::null()), 0);
    }
}

#[test]
fn error_message_truncates() {
    unsafe {
        assert_eq!(sw_path_summary(ptr::null(), ptr::null_mut()), SwStatus::NullPointer);
        let full = sw_last_error_message(ptr::null_mut(), 0);
        assert_eq!(full, "path is null".len());
        let mut buf = [1 as c_char; 5];
        assert_eq!(sw_last_error_message(buf.as_mut_ptr(), 5), full);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "path");
    }
}

#[test]
fn kernel_and_interval_values() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(sw_kernel_space_integral(0.7, 2.0, &mut v), SwStatus::Ok);
        assert!((v - 0.7).abs() < 1e-15);
        assert_eq!(sw_circle_kernel(0.3, 0.1, 1.0, &mut v), SwStatus::Ok);
        assert_eq!(v, 0.5);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(sw_wilson_interval(0, 1, &mut lo, &mut hi), SwStatus::Ok);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.7935).abs() < 1e-4);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stochwave.h")).unwrap();
    for name in [
        "sw_last_error_message",
        "sw_version",
        "sw_config_parse",
        "sw_config_free",
        "sw_config_set_n_paths",
        "sw_config_set_alpha_list",
        "sw_run_path",
        "sw_path_free",
        "sw_path_summary",
        "sw_path_minima",
        "sw_run_sweep",
        "sw_sweep_free",
        "sw_sweep_len",
        "sw_sweep_row",
        "sw_circle_kernel",
        "sw_kernel_space_integral",
        "sw_wilson_interval",
        "typedef struct SwConfig SwConfig",
        "SW_STATUS_PANIC = 8",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
