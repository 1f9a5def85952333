//! C ABI for the cleaners toolkit.
//!
//! Conventions: every fallible call returns a [`CcStatus`] and writes its
//! results through out-pointers, handles are opaque and released through
//! their `_free` function, strings returned as `char*` are released through
//! [`cc_string_free`], and [`cc_last_error`] describes the most recent
//! failure on the calling thread. All entry points catch panics and report
//! them as [`CcStatus::Panic`] instead of unwinding across the boundary.
//!
//! Safety contract, shared by every function below that takes pointers:
//! out-pointers must be valid for a write of the pointed-to type (null is
//! tolerated and reported), handle pointers must come from this library and
//! not have been freed, and string arguments must be NUL-terminated.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use cleaners_core::bounds::{
    closed_form_time, delta_threshold, impossibility_probability, impossibility_threshold,
    minimal_s_hat, recursive_bound_trajectory, step_probability, BoundCurve, BoundParams,
};
use cleaners_core::config::parse_run_config;
use cleaners_core::region::sphere_potential_size;
use cleaners_core::report::{aggregate_csv, runs_csv, Metadata};
use cleaners_core::sim::{run_batch, BatchOutput, Outcome, RunConfig};
use cleaners_core::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// A parameter was outside its documented domain.
    InvalidParam = 3,
    /// The area bound needs more tiles than agents (s > k fails).
    BoundDomain = 4,
    /// Spread outpaces the team for these parameters, so no finite
    /// cleaning-time bound exists.
    GrowthRegime = 5,
    /// The trajectory from s0 to the target crosses between shrinking and
    /// growing regimes, so the closed form does not apply.
    MixedRegime = 6,
    /// The initial size sits at or below the impossibility threshold.
    BelowThreshold = 7,
    /// No point of the requested sweep was feasible.
    AllInfeasible = 8,
    /// The config text failed to parse.
    ConfigParse = 9,
    /// The config parsed but its values are inconsistent.
    ConfigValidation = 10,
    /// An internal invariant was violated; treat results as unusable.
    InvariantBreach = 11,
    /// The addressed tile is not contaminated.
    NotContaminated = 12,
    /// The operation needs a non-empty region.
    EmptyRegion = 13,
    /// An index argument was past the end of the collection.
    OutOfRange = 14,
    Io = 15,
    /// A panic was caught at the boundary.
    Panic = 16,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: &Error) -> CcStatus {
    set_error(&err.to_string());
    match err {
        Error::NotContaminated { .. } => CcStatus::NotContaminated,
        Error::EmptyRegion | Error::EmptyShape => CcStatus::EmptyRegion,
        Error::UnsupportedRadius(_) | Error::InvalidParam { .. } | Error::NoTrajectory => {
            CcStatus::InvalidParam
        }
        Error::BoundDomain { .. } => CcStatus::BoundDomain,
        Error::GrowthRegime { .. } => CcStatus::GrowthRegime,
        Error::MixedRegime { .. } => CcStatus::MixedRegime,
        Error::BelowThreshold { .. } => CcStatus::BelowThreshold,
        Error::AllInfeasible => CcStatus::AllInfeasible,
        Error::ConfigParse { .. } => CcStatus::ConfigParse,
        Error::ConfigValidation(_) => CcStatus::ConfigValidation,
        Error::InvariantBreach(_) => CcStatus::InvariantBreach,
        Error::Io(_) => CcStatus::Io,
    }
}

fn guarded(f: impl FnOnce() -> CcStatus) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic caught at the C boundary");
            CcStatus::Panic
        }
    }
}

/// Writes `value` through `out`, failing cleanly on a null pointer.
unsafe fn put<T>(out: *mut T, value: T) -> CcStatus {
    if out.is_null() {
        set_error("null out-pointer");
        return CcStatus::NullPointer;
    }
    unsafe { out.write(value) };
    CcStatus::Ok
}

/// Recursion curve handle.
pub struct CcCurve {
    curve: BoundCurve,
}

/// Finished simulation batch handle.
pub struct CcBatch {
    config: RunConfig,
    batch: BatchOutput,
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string; never free it.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(cleaners_core::VERSION).expect("version has no NUL"))
        .as_ptr()
}

/// Frees a string returned by this library. Accepts null.
///
/// # Safety
/// `s` must have been returned by a `cc_*_csv` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Least possible potential boundary of a region of `s` tiles with `k`
/// agents already subtracted: floor(2 sqrt(2(s - k) - 1)).
#[no_mangle]
pub unsafe extern "C" fn cc_sphere_potential_size(s: u64, k: u64, out: *mut u64) -> CcStatus {
    guarded(|| match sphere_potential_size(s, k) {
        Ok(value) => unsafe { put(out, value) },
        Err(e) => fail(&e),
    })
}

/// Probability that one spread step stays at or above its floor:
/// 1 - exp(-delta^2 p sqrt(2(s - k) - 1)).
#[no_mangle]
pub unsafe extern "C" fn cc_step_probability(
    s: u64,
    k: u64,
    p: f64,
    delta: f64,
    out: *mut f64,
) -> CcStatus {
    guarded(|| match step_probability(s, k, p, delta) {
        Ok(value) => unsafe { put(out, value) },
        Err(e) => fail(&e),
    })
}

/// Largest initial size with no persistence guarantee at zero slack.
#[no_mangle]
pub unsafe extern "C" fn cc_impossibility_threshold(k: u64, p: f64, out: *mut u64) -> CcStatus {
    guarded(|| match impossibility_threshold(k, p) {
        Ok(value) => unsafe { put(out, value) },
        Err(e) => fail(&e),
    })
}

/// Impossibility threshold at slack `delta` in [0, 1).
#[no_mangle]
pub unsafe extern "C" fn cc_delta_threshold(k: u64, p: f64, delta: f64, out: *mut u64) -> CcStatus {
    guarded(|| match delta_threshold(k, p, delta) {
        Ok(value) => unsafe { put(out, value) },
        Err(e) => fail(&e),
    })
}

/// Probability that a region starting above the slack-adjusted threshold is
/// still at or above its initial size after `t` steps.
#[no_mangle]
pub unsafe extern "C" fn cc_impossibility_probability(
    s0: u64,
    k: u64,
    p: f64,
    delta: f64,
    t: u64,
    out: *mut f64,
) -> CcStatus {
    guarded(|| match impossibility_probability(s0, k, p, delta, t) {
        Ok(value) => unsafe { put(out, value) },
        Err(e) => fail(&e),
    })
}

/// Closed-form bound on the steps to shrink from `s0` to `s_hat`, with the
/// probability the guarantee holds.
#[no_mangle]
pub unsafe extern "C" fn cc_closed_form_time(
    s0: u64,
    k: u64,
    p: f64,
    delta: f64,
    s_hat: u64,
    out_tau: *mut f64,
    out_t_ceil: *mut u64,
    out_q_bound: *mut f64,
) -> CcStatus {
    guarded(|| {
        let params = match BoundParams::new(s0, k, p, delta, s_hat) {
            Ok(params) => params,
            Err(e) => return fail(&e),
        };
        match closed_form_time(&params) {
            Ok(bound) => unsafe {
                let status = put(out_tau, bound.tau_hat);
                if status != CcStatus::Ok {
                    return status;
                }
                let status = put(out_t_ceil, bound.t_ceil);
                if status != CcStatus::Ok {
                    return status;
                }
                put(out_q_bound, bound.q_bound)
            },
            Err(e) => fail(&e),
        }
    })
}

/// Smallest reachable target area whose guarantee still meets `q_target`,
/// or `found = false` when no target is feasible at this slack.
#[no_mangle]
pub unsafe extern "C" fn cc_minimal_s_hat(
    s0: u64,
    k: u64,
    p: f64,
    q_target: f64,
    delta: f64,
    out_s_hat: *mut u64,
    out_found: *mut bool,
) -> CcStatus {
    guarded(|| match minimal_s_hat(s0, k, p, q_target, delta) {
        Ok(Some(s_hat)) => unsafe {
            let status = put(out_s_hat, s_hat);
            if status != CcStatus::Ok {
                return status;
            }
            put(out_found, true)
        },
        Ok(None) => unsafe {
            let status = put(out_s_hat, 0);
            if status != CcStatus::Ok {
                return status;
            }
            put(out_found, false)
        },
        Err(e) => fail(&e),
    })
}

/// Builds the area lower-bound recursion curve from `s0` down to `s_hat`
/// (at most `max_steps` points past the start). Free with
/// `cc_bound_curve_free`.
#[no_mangle]
pub unsafe extern "C" fn cc_bound_curve_new(
    s0: u64,
    k: u64,
    p: f64,
    delta: f64,
    s_hat: u64,
    max_steps: u64,
    out: *mut *mut CcCurve,
) -> CcStatus {
    guarded(|| {
        let params = match BoundParams::new(s0, k, p, delta, s_hat) {
            Ok(params) => params,
            Err(e) => return fail(&e),
        };
        let curve = recursive_bound_trajectory(&params, max_steps);
        unsafe { put(out, Box::into_raw(Box::new(CcCurve { curve }))) }
    })
}

/// Number of points on the curve (the start point included).
#[no_mangle]
pub unsafe extern "C" fn cc_bound_curve_len(curve: *const CcCurve, out: *mut u64) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { curve.as_ref() }) else {
            set_error("null curve handle");
            return CcStatus::NullPointer;
        };
        unsafe { put(out, handle.curve.points.len() as u64) }
    })
}

/// Reads one curve point: time, area floor, per-step probability, and the
/// cumulative guarantee up to that step.
#[no_mangle]
pub unsafe extern "C" fn cc_bound_curve_point(
    curve: *const CcCurve,
    index: u64,
    out_t: *mut u64,
    out_s_lower: *mut u64,
    out_q_step: *mut f64,
    out_q_cum: *mut f64,
) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { curve.as_ref() }) else {
            set_error("null curve handle");
            return CcStatus::NullPointer;
        };
        let Some(point) = handle.curve.points.get(index as usize) else {
            set_error("curve index out of range");
            return CcStatus::OutOfRange;
        };
        unsafe {
            let status = put(out_t, point.t);
            if status != CcStatus::Ok {
                return status;
            }
            let status = put(out_s_lower, point.s_lower);
            if status != CcStatus::Ok {
                return status;
            }
            let status = put(out_q_step, point.q_step);
            if status != CcStatus::Ok {
                return status;
            }
            put(out_q_cum, point.q_cum)
        }
    })
}

/// First step whose area floor is at or below `s_hat`; `found = false`
/// when the curve never reaches it.
#[no_mangle]
pub unsafe extern "C" fn cc_bound_curve_first_passage(
    curve: *const CcCurve,
    s_hat: u64,
    out_t: *mut u64,
    out_found: *mut bool,
) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { curve.as_ref() }) else {
            set_error("null curve handle");
            return CcStatus::NullPointer;
        };
        let (t, found) = match handle.curve.first_passage(s_hat) {
            Some(t) => (t, true),
            None => (0, false),
        };
        unsafe {
            let status = put(out_t, t);
            if status != CcStatus::Ok {
                return status;
            }
            put(out_found, found)
        }
    })
}

/// Frees a curve handle. Accepts null.
///
/// # Safety
/// `curve` must come from `cc_bound_curve_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cc_bound_curve_free(curve: *mut CcCurve) {
    if !curve.is_null() {
        drop(unsafe { Box::from_raw(curve) });
    }
}

/// Parses a run config from its key-value text form and runs the full
/// seeded batch. Free the handle with `cc_batch_free`.
#[no_mangle]
pub unsafe extern "C" fn cc_simulate(
    config_text: *const c_char,
    out: *mut *mut CcBatch,
) -> CcStatus {
    guarded(|| {
        if config_text.is_null() {
            set_error("null config text");
            return CcStatus::NullPointer;
        }
        let text = match unsafe { CStr::from_ptr(config_text) }.to_str() {
            Ok(text) => text,
            Err(_) => {
                set_error("config text is not valid UTF-8");
                return CcStatus::Utf8;
            }
        };
        let config = match parse_run_config(text) {
            Ok(config) => config,
            Err(e) => return fail(&e),
        };
        match run_batch(&config) {
            Ok(batch) => unsafe { put(out, Box::into_raw(Box::new(CcBatch { config, batch }))) },
            Err(e) => fail(&e),
        }
    })
}

unsafe fn batch_field<T>(
    batch: *const CcBatch,
    out: *mut T,
    read: impl FnOnce(&CcBatch) -> T,
) -> CcStatus {
    let Some(handle) = (unsafe { batch.as_ref() }) else {
        set_error("null batch handle");
        return CcStatus::NullPointer;
    };
    let value = read(handle);
    unsafe { put(out, value) }
}

/// Replications in the batch.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_n_runs(batch: *const CcBatch, out: *mut u64) -> CcStatus {
    guarded(|| unsafe { batch_field(batch, out, |b| b.batch.stats.n_runs) })
}

/// Runs that cleaned everything before the cutoff.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_n_success(batch: *const CcBatch, out: *mut u64) -> CcStatus {
    guarded(|| unsafe { batch_field(batch, out, |b| b.batch.stats.n_success) })
}

/// Runs that stopped on an internal error; their streams are excluded from
/// the statistics.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_n_aborted(batch: *const CcBatch, out: *mut u64) -> CcStatus {
    guarded(|| unsafe { batch_field(batch, out, |b| b.batch.stats.n_aborted) })
}

/// Success fraction in [0, 1].
#[no_mangle]
pub unsafe extern "C" fn cc_batch_success_pct(batch: *const CcBatch, out: *mut f64) -> CcStatus {
    guarded(|| unsafe { batch_field(batch, out, |b| b.batch.stats.success_pct) })
}

/// 95% score interval for the success fraction.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_success_interval(
    batch: *const CcBatch,
    out_low: *mut f64,
    out_high: *mut f64,
) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { batch.as_ref() }) else {
            set_error("null batch handle");
            return CcStatus::NullPointer;
        };
        let (low, high) = handle.batch.stats.success_ci;
        unsafe {
            let status = put(out_low, low);
            if status != CcStatus::Ok {
                return status;
            }
            put(out_high, high)
        }
    })
}

/// Mean steps to success, or NaN when no run succeeded.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_mean_t_success(batch: *const CcBatch, out: *mut f64) -> CcStatus {
    guarded(|| unsafe {
        batch_field(batch, out, |b| {
            b.batch.stats.mean_t_success.unwrap_or(f64::NAN)
        })
    })
}

/// Reads one run record: its RNG stream, whether it succeeded, the success
/// step (0 on failure), the final area (0 on success), and the holes the
/// spread opened along the way.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_run(
    batch: *const CcBatch,
    index: u64,
    out_stream: *mut u64,
    out_success: *mut bool,
    out_t_success: *mut u64,
    out_final_s: *mut u64,
    out_holes: *mut u64,
) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { batch.as_ref() }) else {
            set_error("null batch handle");
            return CcStatus::NullPointer;
        };
        let Some(record) = handle.batch.records.get(index as usize) else {
            set_error("run index out of range");
            return CcStatus::OutOfRange;
        };
        let (success, t_success, final_s) = match record.outcome {
            Outcome::Success { t_success } => (true, t_success, 0),
            Outcome::CutoffFailure { final_s } => (false, 0, final_s),
        };
        unsafe {
            let status = put(out_stream, record.stream_id);
            if status != CcStatus::Ok {
                return status;
            }
            let status = put(out_success, success);
            if status != CcStatus::Ok {
                return status;
            }
            let status = put(out_t_success, t_success);
            if status != CcStatus::Ok {
                return status;
            }
            let status = put(out_final_s, final_s);
            if status != CcStatus::Ok {
                return status;
            }
            put(out_holes, record.holes_created)
        }
    })
}

fn csv_out(out: *mut *mut c_char, text: String) -> CcStatus {
    match CString::new(text) {
        Ok(cstring) => unsafe { put(out, cstring.into_raw()) },
        Err(_) => {
            set_error("CSV contained an interior NUL");
            CcStatus::InvariantBreach
        }
    }
}

/// Per-run table in CSV form. Free with `cc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_runs_csv(
    batch: *const CcBatch,
    out: *mut *mut c_char,
) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { batch.as_ref() }) else {
            set_error("null batch handle");
            return CcStatus::NullPointer;
        };
        let meta = Metadata::from_run_config(&handle.config);
        csv_out(out, runs_csv(&meta, &handle.batch.records))
    })
}

/// Aggregate statistics table in CSV form. Free with `cc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_aggregate_csv(
    batch: *const CcBatch,
    out: *mut *mut c_char,
) -> CcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { batch.as_ref() }) else {
            set_error("null batch handle");
            return CcStatus::NullPointer;
        };
        let meta = Metadata::from_run_config(&handle.config);
        csv_out(out, aggregate_csv(&meta, &handle.batch.stats))
    })
}

/// Frees a batch handle. Accepts null.
///
/// # Safety
/// `batch` must come from `cc_simulate` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cc_batch_free(batch: *mut CcBatch) {
    if !batch.is_null() {
        drop(unsafe { Box::from_raw(batch) });
    }
}
