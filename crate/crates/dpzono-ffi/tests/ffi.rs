//! Exercises the C ABI through the exported symbols, the way a foreign
//! caller would.

use std::ffi::{CStr, CString};
use std::ptr;

use dpzono_ffi::*;

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(dpz_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

#[test]
fn optimize_query_save_load_roundtrip() {
    unsafe {
        let mut handle: *mut DpzNoise = ptr::null_mut();
        let status = dpz_noise_optimize(0.3, 7.0, 7, 1.0, 1, 42, 600, 0, &mut handle);
        assert_eq!(status, DpzStatus::Ok, "{}", last_error());
        assert!(!handle.is_null());

        let mut delta = 0.0;
        assert_eq!(
            dpz_noise_delta(handle, 0.3, 1.0, &mut delta),
            DpzStatus::Ok
        );
        assert!(delta > 0.0 && delta <= 1.0 / 14.0, "delta {delta}");

        let mut utility = 0.0;
        assert_eq!(dpz_noise_utility(handle, 1, &mut utility), DpzStatus::Ok);
        assert!(utility > 0.0 && utility < 7.0);

        let mut len = 0usize;
        assert_eq!(dpz_noise_len(handle, &mut len), DpzStatus::Ok);
        assert_eq!(len, 14);

        let mut phi = vec![0.0; len];
        let mut mass = vec![0.0; len];
        assert_eq!(
            dpz_noise_values(handle, phi.as_mut_ptr(), mass.as_mut_ptr(), len),
            DpzStatus::Ok
        );
        assert_eq!(phi[0], -6.5);
        assert!((mass.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let mut draws = vec![0.0; 256];
        assert_eq!(
            dpz_noise_sample(handle, 7, draws.as_mut_ptr(), draws.len()),
            DpzStatus::Ok
        );
        assert!(draws.iter().all(|x| x.abs() < 7.0));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("noise.json").to_str().unwrap()).unwrap();
        assert_eq!(dpz_noise_save(handle, path.as_ptr()), DpzStatus::Ok);

        let mut reloaded: *mut DpzNoise = ptr::null_mut();
        assert_eq!(
            dpz_noise_load(path.as_ptr(), &mut reloaded),
            DpzStatus::Ok,
            "{}",
            last_error()
        );
        let mut delta2 = 0.0;
        assert_eq!(
            dpz_noise_delta(reloaded, 0.3, 1.0, &mut delta2),
            DpzStatus::Ok
        );
        assert!((delta - delta2).abs() <= 1e-9);

        dpz_noise_free(handle);
        dpz_noise_free(reloaded);
    }
}

#[test]
fn status_codes_describe_failures() {
    unsafe {
        // misaligned sensitivity
        let mut handle: *mut DpzNoise = ptr::null_mut();
        let status = dpz_noise_optimize(0.3, 7.0, 7, 0.3, 1, 0, 100, 0, &mut handle);
        assert_eq!(status, DpzStatus::MisalignedSensitivity);
        assert!(last_error().contains("N = 70"), "{}", last_error());

        // null pointers
        assert_eq!(
            dpz_noise_optimize(0.3, 7.0, 7, 1.0, 1, 0, 100, 0, ptr::null_mut()),
            DpzStatus::NullPointer
        );
        let mut out = 0.0;
        assert_eq!(
            dpz_noise_delta(ptr::null(), 0.3, 1.0, &mut out),
            DpzStatus::NullPointer
        );

        // invalid file
        let missing = CString::new("/nonexistent/noise.json").unwrap();
        let mut reloaded: *mut DpzNoise = ptr::null_mut();
        assert_eq!(
            dpz_noise_load(missing.as_ptr(), &mut reloaded),
            DpzStatus::Io
        );

        // bad closed-form arguments
        assert_eq!(
            dpz_laplace_range(0.0, 0.1, 1.0, &mut out),
            DpzStatus::InvalidArgument
        );
    }
}

#[test]
fn laplace_helpers_invert() {
    unsafe {
        let mut range = 0.0;
        assert_eq!(dpz_laplace_range(0.3, 0.0244, 1.0, &mut range), DpzStatus::Ok);
        assert!((range - 7.001252).abs() < 1e-5);
        let mut back = 0.0;
        assert_eq!(dpz_laplace_delta(range, 0.3, 1.0, &mut back), DpzStatus::Ok);
        assert!((back - 0.0244).abs() < 1e-12);
    }
}

#[test]
fn simulate_returns_summary_json() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let trace = CString::new(dir.path().join("trace.csv").to_str().unwrap()).unwrap();
        let mut summary: *mut std::ffi::c_char = ptr::null_mut();
        let status = dpz_simulate(ptr::null(), ptr::null(), trace.as_ptr(), &mut summary);
        assert_eq!(status, DpzStatus::Ok, "{}", last_error());

        let text = CStr::from_ptr(summary).to_str().unwrap().to_owned();
        dpz_string_free(summary);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["containment_rate"].as_f64().unwrap(), 1.0);
        assert_eq!(parsed["steps"].as_u64().unwrap(), 200);

        let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        assert_eq!(csv.lines().count(), 201);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dpzono.h");
    let text = std::fs::read_to_string(header).expect("header was generated by the build");
    for symbol in [
        "DpzStatus",
        "DpzNoise",
        "dpz_noise_optimize",
        "dpz_noise_delta",
        "dpz_laplace_range",
        "dpz_simulate",
        "dpz_string_free",
        "dpz_last_error_message",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
