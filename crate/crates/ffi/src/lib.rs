//! C ABI over `ofw-core`.
//!
//! Every function returns an [`OfwStatus`]. On failure a message describing
//! the error is available from [`ofw_last_error_message`] on the calling
//! thread. Handles are opaque and must be released with the matching
//! `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ofw_core::harness::{self, ExperimentConfig, ResultRow};
use ofw_core::{Error, FeasibleSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ContractViolation = 4,
    ConfigError = 5,
    RuntimeError = 6,
    Panic = 7,
    IndexOutOfRange = 8,
}

/// A compact convex feasible set.
pub struct OfwSet {
    inner: FeasibleSet,
}

/// A validated experiment configuration.
pub struct OfwExperiment {
    inner: ExperimentConfig,
}

/// Result rows of one experiment run, sorted by scenario, learner and horizon.
pub struct OfwResults {
    rows: Vec<ResultRow>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> OfwStatus {
    match e {
        Error::DimensionMismatch { .. } => OfwStatus::DimensionMismatch,
        Error::InvalidInput(_) => OfwStatus::InvalidArgument,
        Error::Contract(_) | Error::Precondition(_) => OfwStatus::ContractViolation,
        Error::Config { .. } => OfwStatus::ConfigError,
        _ => OfwStatus::RuntimeError,
    }
}

struct Failure(OfwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OfwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OfwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OfwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            OfwStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn set_ref<'a>(set: *const OfwSet) -> Result<&'a FeasibleSet, Failure> {
    set.as_ref().map(|s| &s.inner).ok_or_else(|| null("set"))
}

fn check_len(set: &FeasibleSet, len: usize) -> Result<(), Failure> {
    if set.dimension() != len {
        return Err(Error::DimensionMismatch {
            expected: set.dimension(),
            got: len,
        }
        .into());
    }
    Ok(())
}

unsafe fn emit_set(set: FeasibleSet, out: *mut *mut OfwSet) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(OfwSet { inner: set })), "out")
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ofw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Euclidean ball `{x : ||x - center|| <= radius}`.
#[no_mangle]
pub unsafe extern "C" fn ofw_set_ball(
    center: *const f64,
    dimension: usize,
    radius: f64,
    out: *mut *mut OfwSet,
) -> OfwStatus {
    guard(|| {
        let c = slice(center, dimension, "center")?.to_vec();
        emit_set(FeasibleSet::ball(c, radius)?, out)
    })
}

/// Box `{x : lower <= x <= upper}`.
#[no_mangle]
pub unsafe extern "C" fn ofw_set_box(
    lower: *const f64,
    upper: *const f64,
    dimension: usize,
    out: *mut *mut OfwSet,
) -> OfwStatus {
    guard(|| {
        let lo = slice(lower, dimension, "lower")?.to_vec();
        let hi = slice(upper, dimension, "upper")?.to_vec();
        emit_set(FeasibleSet::cube(lo, hi)?, out)
    })
}

/// Probability simplex in `dimension >= 2` coordinates.
#[no_mangle]
pub unsafe extern "C" fn ofw_set_simplex(dimension: usize, out: *mut *mut OfwSet) -> OfwStatus {
    guard(|| emit_set(FeasibleSet::simplex(dimension)?, out))
}

/// `{x : ||x||_1 <= radius}`.
#[no_mangle]
pub unsafe extern "C" fn ofw_set_l1_ball(dimension: usize, radius: f64, out: *mut *mut OfwSet) -> OfwStatus {
    guard(|| emit_set(FeasibleSet::l1_ball(dimension, radius)?, out))
}

#[no_mangle]
pub unsafe extern "C" fn ofw_set_free(set: *mut OfwSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ofw_set_dimension(set: *const OfwSet, out: *mut usize) -> OfwStatus {
    guard(|| write(out, set_ref(set)?.dimension(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn ofw_set_diameter(set: *const OfwSet, out: *mut f64) -> OfwStatus {
    guard(|| write(out, set_ref(set)?.diameter(), "out"))
}

/// Writes `argmin_{v in K} <direction, v>` to `out` (length `dimension`).
#[no_mangle]
pub unsafe extern "C" fn ofw_set_lmo(
    set: *const OfwSet,
    direction: *const f64,
    dimension: usize,
    out: *mut f64,
) -> OfwStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_len(s, dimension)?;
        let v = s.lmo(slice(direction, dimension, "direction")?)?;
        out_slice(out, dimension, "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// Writes the Euclidean projection of `point` to `out`.
#[no_mangle]
pub unsafe extern "C" fn ofw_set_project(
    set: *const OfwSet,
    point: *const f64,
    dimension: usize,
    out: *mut f64,
) -> OfwStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_len(s, dimension)?;
        let p = s.project(slice(point, dimension, "point")?)?;
        out_slice(out, dimension, "out")?.copy_from_slice(&p);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ofw_set_contains(
    set: *const OfwSet,
    point: *const f64,
    dimension: usize,
    tolerance: f64,
    out: *mut bool,
) -> OfwStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_len(s, dimension)?;
        let inside = s.contains(slice(point, dimension, "point")?, tolerance)?;
        write(out, inside, "out")
    })
}

/// Radius of the largest ball around `point` inside the set.
#[no_mangle]
pub unsafe extern "C" fn ofw_set_interior_radius(
    set: *const OfwSet,
    point: *const f64,
    dimension: usize,
    out: *mut f64,
) -> OfwStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_len(s, dimension)?;
        let r = s.interior_radius(slice(point, dimension, "point")?)?;
        write(out, r, "out")
    })
}

/// Closed-form Frank-Wolfe line-search step in `[0, 1]`.
#[no_mangle]
pub unsafe extern "C" fn ofw_line_search_sigma(
    gradient: *const f64,
    x: *const f64,
    v: *const f64,
    dimension: usize,
    alpha: f64,
    out: *mut f64,
) -> OfwStatus {
    guard(|| {
        let s = ofw_core::learners::line_search_sigma(
            slice(gradient, dimension, "gradient")?,
            slice(x, dimension, "x")?,
            slice(v, dimension, "v")?,
            alpha,
        )?;
        write(out, s, "out")
    })
}

/// Inner iterations `K` and contraction factor `C` for the multi-update learner.
#[no_mangle]
pub unsafe extern "C" fn ofw_compute_k(
    alpha: f64,
    beta_f: f64,
    diameter: f64,
    interior_radius: f64,
    bound_m: f64,
    k_out: *mut usize,
    c_out: *mut f64,
) -> OfwStatus {
    guard(|| {
        let s = ofw_core::learners::compute_k(alpha, beta_f, diameter, interior_radius, bound_m)?;
        write(k_out, s.k, "k_out")?;
        write(c_out, s.c, "c_out")
    })
}

/// Parses and validates a TOML experiment configuration.
#[no_mangle]
pub unsafe extern "C" fn ofw_experiment_parse(config: *const c_char, out: *mut *mut OfwExperiment) -> OfwStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| Failure(OfwStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let cfg = harness::parse_config(text)?;
        write(out, Box::into_raw(Box::new(OfwExperiment { inner: cfg })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ofw_experiment_free(experiment: *mut OfwExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Runs every scenario. Rows that failed at run time are still returned.
#[no_mangle]
pub unsafe extern "C" fn ofw_experiment_run(experiment: *const OfwExperiment, out: *mut *mut OfwResults) -> OfwStatus {
    guard(|| {
        let exp = experiment.as_ref().ok_or_else(|| null("experiment"))?;
        let rows = harness::run_experiment(&exp.inner)?;
        write(out, Box::into_raw(Box::new(OfwResults { rows })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ofw_results_free(results: *mut OfwResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ofw_results_len(results: *const OfwResults, out: *mut usize) -> OfwStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        write(out, r.rows.len(), "out")
    })
}

/// Dynamic regret of row `index`. Fails with `RuntimeError` for a row whose
/// run failed; the message then carries the diagnostic.
#[no_mangle]
pub unsafe extern "C" fn ofw_results_regret(results: *const OfwResults, index: usize, out: *mut f64) -> OfwStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        let row = r.rows.get(index).ok_or_else(|| {
            Failure(OfwStatus::IndexOutOfRange, format!("row {index} out of range (len {})", r.rows.len()))
        })?;
        match (row.regret, &row.failure) {
            (Some(v), _) => write(out, v, "out"),
            (None, f) => Err(Failure(
                OfwStatus::RuntimeError,
                f.clone().unwrap_or_else(|| "row has no regret".into()),
            )),
        }
    })
}

/// Renders the rows as CSV. Release the string with [`ofw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ofw_results_to_csv(results: *const OfwResults, out: *mut *mut c_char) -> OfwStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        let text = harness::to_csv_string(&r.rows)?;
        let c = CString::new(text).map_err(|e| Failure(OfwStatus::RuntimeError, e.to_string()))?;
        write(out, c.into_raw(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ofw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
