//! C ABI for the dpzono estimation library.
//!
//! Conventions: every fallible call returns a [`DpzStatus`]; outputs go
//! through out-pointers. `DpzNoise` is an opaque handle created by
//! `dpz_noise_optimize` or `dpz_noise_load` and released with
//! `dpz_noise_free`. Strings returned through out-pointers are
//! allocated by this library and must be released with
//! `dpz_string_free`. On any non-zero status,
//! `dpz_last_error_message` returns a human-readable description,
//! valid on the calling thread until its next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dpzono::noise::file as noise_file;
use dpzono::noise::{
    self, optimize_distribution, NoiseModelParams, OptimizerConfig, TruncatedNoiseDistribution,
};
use dpzono::sim::{self, files, NoiseSource};
use dpzono::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidDistribution = 4,
    MisalignedSensitivity = 5,
    Diverged = 6,
    InvalidUtf8 = 7,
}

/// Opaque handle to a learned noise distribution.
pub struct DpzNoise {
    distribution: TruncatedNoiseDistribution,
    params: NoiseModelParams,
    config: OptimizerConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: DpzStatus, message: &str) -> DpzStatus {
    let stored = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = stored);
    status
}

fn fail_with(err: Error) -> DpzStatus {
    let status = match &err {
        Error::MisalignedSensitivity { .. } => DpzStatus::MisalignedSensitivity,
        Error::InvalidDistribution(_) => DpzStatus::InvalidDistribution,
        Error::Diverged(_) => DpzStatus::Diverged,
        Error::Io(_) => DpzStatus::Io,
        _ => DpzStatus::InvalidArgument,
    };
    fail(status, &err.to_string())
}

/// Message for the most recent failure on this thread; valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dpz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an out-parameter
/// of this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn dpz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, DpzStatus> {
    if ptr.is_null() {
        return Err(fail(DpzStatus::NullPointer, "path pointer is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s).to_path_buf()),
        Err(_) => Err(fail(DpzStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

/// Learns a truncated noise distribution. `epochs = 0` selects the
/// default budget, `sigmoids = 0` the default model size. On success
/// writes a new handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer to a `DpzNoise*` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_optimize(
    epsilon: f64,
    range: f64,
    bins: u32,
    sensitivity: f64,
    gamma: u32,
    seed: u64,
    epochs: u32,
    sigmoids: u32,
    out: *mut *mut DpzNoise,
) -> DpzStatus {
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output handle pointer is null");
    }
    let mut config = OptimizerConfig::new(epsilon, sensitivity);
    config.seed = seed;
    if gamma > u8::MAX as u32 {
        return fail(DpzStatus::InvalidArgument, "gamma out of range");
    }
    config.gamma = gamma as u8;
    if epochs > 0 {
        config.epochs = epochs;
    }
    let sigmoids = if sigmoids == 0 { 10 } else { sigmoids as usize };
    match optimize_distribution(&config, range, bins, sigmoids, 500.0) {
        Ok((params, distribution)) => {
            let handle = Box::new(DpzNoise {
                distribution,
                params,
                config,
            });
            *out = Box::into_raw(handle);
            DpzStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Loads a noise file, re-validating every invariant.
///
/// # Safety
/// `path` must point to a NUL-terminated string and `out` to a
/// `DpzNoise*` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_load(
    path: *const c_char,
    out: *mut *mut DpzNoise,
) -> DpzStatus {
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output handle pointer is null");
    }
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match noise_file::read(&path) {
        Ok(loaded) => {
            let handle = Box::new(DpzNoise {
                distribution: loaded.distribution,
                params: loaded.params,
                config: loaded.config,
            });
            *out = Box::into_raw(handle);
            DpzStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Writes a noise handle to disk in the library's JSON format.
///
/// # Safety
/// `noise` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_save(
    noise: *const DpzNoise,
    path: *const c_char,
) -> DpzStatus {
    let Some(handle) = noise.as_ref() else {
        return fail(DpzStatus::NullPointer, "noise handle is null");
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match noise_file::write(&path, &handle.distribution, &handle.params, &handle.config) {
        Ok(()) => DpzStatus::Ok,
        Err(e) => fail_with(e),
    }
}

/// Releases a noise handle.
///
/// # Safety
/// `noise` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_free(noise: *mut DpzNoise) {
    if !noise.is_null() {
        drop(Box::from_raw(noise));
    }
}

/// Tight privacy slack of the handle's distribution at the requested
/// privacy point.
///
/// # Safety
/// `noise` must be a live handle and `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_delta(
    noise: *const DpzNoise,
    epsilon: f64,
    sensitivity: f64,
    out: *mut f64,
) -> DpzStatus {
    let Some(handle) = noise.as_ref() else {
        return fail(DpzStatus::NullPointer, "noise handle is null");
    };
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output pointer is null");
    }
    match noise::delta_of(&handle.distribution, epsilon, sensitivity) {
        Ok(delta) => {
            *out = delta;
            DpzStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Utility loss (gamma-th moment norm) of the handle's distribution.
///
/// # Safety
/// `noise` must be a live handle and `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_utility(
    noise: *const DpzNoise,
    gamma: u32,
    out: *mut f64,
) -> DpzStatus {
    let Some(handle) = noise.as_ref() else {
        return fail(DpzStatus::NullPointer, "noise handle is null");
    };
    if out.is_null() || gamma > u8::MAX as u32 {
        return fail(DpzStatus::InvalidArgument, "bad output pointer or gamma");
    }
    match noise::utility_loss(&handle.distribution, gamma as u8) {
        Ok(u) => {
            *out = u;
            DpzStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Number of grid points (2N) of the handle's distribution.
///
/// # Safety
/// `noise` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_len(noise: *const DpzNoise, out: *mut usize) -> DpzStatus {
    let Some(handle) = noise.as_ref() else {
        return fail(DpzStatus::NullPointer, "noise handle is null");
    };
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output pointer is null");
    }
    *out = handle.distribution.grid().len();
    DpzStatus::Ok
}

/// Copies the grid points and probability masses into caller-provided
/// buffers of capacity `capacity` (at least the value reported by
/// `dpz_noise_len`). Either buffer may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold at least `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_values(
    noise: *const DpzNoise,
    phi: *mut f64,
    mass: *mut f64,
    capacity: usize,
) -> DpzStatus {
    let Some(handle) = noise.as_ref() else {
        return fail(DpzStatus::NullPointer, "noise handle is null");
    };
    let len = handle.distribution.grid().len();
    if capacity < len {
        return fail(
            DpzStatus::InvalidArgument,
            "buffer capacity is smaller than the grid",
        );
    }
    if !phi.is_null() {
        std::ptr::copy_nonoverlapping(handle.distribution.grid().points().as_ptr(), phi, len);
    }
    if !mass.is_null() {
        std::ptr::copy_nonoverlapping(handle.distribution.mass().as_ptr(), mass, len);
    }
    DpzStatus::Ok
}

/// Draws `len` IID noise values into `out` using a stream seeded with
/// `seed`.
///
/// # Safety
/// `out` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dpz_noise_sample(
    noise: *const DpzNoise,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> DpzStatus {
    let Some(handle) = noise.as_ref() else {
        return fail(DpzStatus::NullPointer, "noise handle is null");
    };
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output pointer is null");
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draws = handle.distribution.sample(len, &mut rng);
    std::ptr::copy_nonoverlapping(draws.as_ptr(), out, len);
    DpzStatus::Ok
}

/// Truncated-Laplace range for a target `(epsilon, delta)`.
///
/// # Safety
/// `out` must be a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_laplace_range(
    epsilon: f64,
    delta: f64,
    sensitivity: f64,
    out: *mut f64,
) -> DpzStatus {
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output pointer is null");
    }
    match noise::laplace_range(epsilon, delta, sensitivity) {
        Ok(a) => {
            *out = a;
            DpzStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Privacy slack achieved by a truncated Laplace mechanism of range
/// `range`.
///
/// # Safety
/// `out` must be a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_laplace_delta(
    range: f64,
    epsilon: f64,
    sensitivity: f64,
    out: *mut f64,
) -> DpzStatus {
    if out.is_null() {
        return fail(DpzStatus::NullPointer, "output pointer is null");
    }
    match noise::laplace_delta(range, epsilon, sensitivity) {
        Ok(delta) => {
            *out = delta;
            DpzStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Runs the tracking experiment. `config_json` may be null for the
/// bundled scenario; `noise` may be null for a non-private run;
/// `trace_path` may be null to skip the per-step CSV. On success,
/// `out_summary_json` receives the summary as a JSON string (release
/// with `dpz_string_free`).
///
/// # Safety
/// Non-null pointers must satisfy the conventions above;
/// `out_summary_json` must be a valid `char**` slot.
#[no_mangle]
pub unsafe extern "C" fn dpz_simulate(
    config_json: *const c_char,
    noise: *const DpzNoise,
    trace_path: *const c_char,
    out_summary_json: *mut *mut c_char,
) -> DpzStatus {
    if out_summary_json.is_null() {
        return fail(DpzStatus::NullPointer, "summary output pointer is null");
    }
    let cfg = if config_json.is_null() {
        sim::SimConfig::circular_tracking_default()
    } else {
        let text = match CStr::from_ptr(config_json).to_str() {
            Ok(s) => s,
            Err(_) => return fail(DpzStatus::InvalidUtf8, "config is not valid UTF-8"),
        };
        let file: files::SimConfigFile = match serde_json::from_str(text) {
            Ok(f) => f,
            Err(e) => return fail(DpzStatus::InvalidArgument, &format!("config: {e}")),
        };
        match file.to_config() {
            Ok(c) => c,
            Err(e) => return fail_with(e),
        }
    };

    let source = match noise.as_ref() {
        Some(handle) => {
            if let Some(dp) = &cfg.dp {
                if let Err(e) = sim::check_dp_match(dp, &handle.distribution) {
                    return fail_with(e);
                }
            }
            NoiseSource::Optimal(&handle.distribution)
        }
        None => NoiseSource::None,
    };

    let (trace, summary) = match sim::monte_carlo(&cfg, source) {
        Ok(r) => r,
        Err(e) => return fail_with(e),
    };

    if !trace_path.is_null() {
        let path = match path_from(trace_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        if let Err(e) = std::fs::write(&path, files::trace_csv(&trace)) {
            return fail(DpzStatus::Io, &format!("cannot write {}: {e}", path.display()));
        }
    }

    let text = match files::summary_json(&summary) {
        Ok(t) => t,
        Err(e) => return fail_with(e),
    };
    match CString::new(text) {
        Ok(s) => {
            *out_summary_json = s.into_raw();
            DpzStatus::Ok
        }
        Err(_) => fail(DpzStatus::InvalidArgument, "summary contains NUL"),
    }
}
