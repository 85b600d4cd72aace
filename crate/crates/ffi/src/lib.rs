//! C ABI over `gaugeproj`.
//!
//! Every fallible function returns a [`GpStatus`]; on failure the message is
//! available from [`gp_last_error_message`] on the same thread. Strings
//! handed out by this library must be released with [`gp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gaugeproj::gauge::{check_integral_condition, doubling_exponent, GaugeFunction, RadiusGrid, VerdictStatus};
use gaugeproj::hierarchy::{
    build_hierarchy, choose_branching, derive_radius_schedule, validate_hierarchy, DiscHierarchy, HierarchyOptions,
};
use gaugeproj::reporting::{parse_config, run_pipeline, to_json_bytes};
use gaugeproj::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    Numerical = 4,
    Config = 5,
    Io = 6,
    Utf8 = 7,
    Panic = 8,
}

/// Verdict codes written by [`gp_check_integral_condition`].
pub const GP_VERDICT_FINITE: i32 = 0;
pub const GP_VERDICT_DIVERGENT: i32 = 1;
pub const GP_VERDICT_INCONCLUSIVE: i32 = 2;

/// Opaque gauge function.
pub struct GpGauge(GaugeFunction);

/// Opaque nested-disc hierarchy.
pub struct GpHierarchy(DiscHierarchy);

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> GpStatus {
    match e {
        Error::Domain(_) | Error::InvalidGauge(_) => GpStatus::InvalidArgument,
        Error::NoExponent { .. }
        | Error::Precondition(_)
        | Error::Schedule(_)
        | Error::Branching(_)
        | Error::DiscCap { .. } => GpStatus::Precondition,
        Error::MonteCarlo(_) | Error::Quadrature(_) => GpStatus::Numerical,
        Error::ConfigParse { .. } | Error::ConfigInvalid(_) => GpStatus::Config,
        Error::Io(_) => GpStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), (GpStatus, String)>>(f: F) -> GpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GpStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside gaugeproj".into());
            GpStatus::Panic
        }
    }
}

fn lib<T>(r: gaugeproj::Result<T>) -> Result<T, (GpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (GpStatus, String) {
    (GpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (GpStatus::Utf8, format!("{what}: {e}")))
}

fn owned(s: String) -> Result<*mut c_char, (GpStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|e| (GpStatus::Utf8, e.to_string()))
}

/// Copy of the last error message on this thread, or null. Free with
/// [`gp_string_free`].
#[no_mangle]
pub extern "C" fn gp_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(m) => CString::new(m.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut()),
        None => ptr::null_mut(),
    })
}

#[no_mangle]
pub extern "C" fn gp_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `f(r) = r^s`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_gauge_power(s: f64, out: *mut *mut GpGauge) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = lib(GaugeFunction::power(s))?;
        *out = Box::into_raw(Box::new(GpGauge(g)));
        Ok(())
    })
}

/// Gauge from its JSON form, e.g. `{"family":"logpower","s":2}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_gauge_from_json(json: *const c_char, out: *mut *mut GpGauge) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let g = lib(GaugeFunction::from_json(text))?;
        *out = Box::into_raw(Box::new(GpGauge(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gp_gauge_free(g: *mut GpGauge) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `log f(r)` from `log r`.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_gauge_evaluate_log(g: *const GpGauge, log_r: f64, out: *mut f64) -> GpStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("gauge"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(g.0.evaluate_log(log_r))?;
        Ok(())
    })
}

/// Fitted doubling exponent `s` and constant `kappa`.
///
/// # Safety
/// `g` must be a live handle; `s` and `kappa` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gp_gauge_doubling(g: *const GpGauge, s: *mut f64, kappa: *mut f64) -> GpStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("gauge"))?;
        if s.is_null() || kappa.is_null() {
            return Err(null("output"));
        }
        let fit = lib(doubling_exponent(&g.0, &RadiusGrid::standard()))?;
        *s = fit.exponent;
        *kappa = fit.kappa;
        Ok(())
    })
}

/// Integral condition for `(f, g)`; writes a `GP_VERDICT_*` code and the
/// value (infinite or NaN unless finite).
///
/// # Safety
/// `f`, `g` must be live handles; `verdict`, `value` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gp_check_integral_condition(
    f: *const GpGauge,
    g: *const GpGauge,
    verdict: *mut i32,
    value: *mut f64,
) -> GpStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("f"))?;
        let g = g.as_ref().ok_or_else(|| null("g"))?;
        if verdict.is_null() || value.is_null() {
            return Err(null("output"));
        }
        let v = lib(check_integral_condition(&f.0, &g.0))?;
        *verdict = match v.status {
            VerdictStatus::Finite => GP_VERDICT_FINITE,
            VerdictStatus::Divergent => GP_VERDICT_DIVERGENT,
            VerdictStatus::Inconclusive => GP_VERDICT_INCONCLUSIVE,
        };
        *value = v.value;
        Ok(())
    })
}

/// Derives the schedule and branching for `f` and builds the hierarchy.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_hierarchy_build(
    f: *const GpGauge,
    depth: usize,
    disc_cap: u64,
    out: *mut *mut GpHierarchy,
) -> GpStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("f"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lib(derive_radius_schedule(&f.0, depth))?;
        let b = lib(choose_branching(&f.0, &s))?;
        let h = lib(build_hierarchy(&f.0, &s, &b, None, HierarchyOptions { disc_cap: disc_cap as u128 }))?;
        *out = Box::into_raw(Box::new(GpHierarchy(h)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gp_hierarchy_free(h: *mut GpHierarchy) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Depth of the hierarchy, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_hierarchy_depth(h: *const GpHierarchy) -> usize {
    h.as_ref().map(|h| h.0.depth()).unwrap_or(0)
}

/// Number of discs at `level`, saturated at `u64::MAX`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_hierarchy_disc_count(h: *const GpHierarchy, level: usize, out: *mut u64) -> GpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("hierarchy"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if level > h.0.depth() {
            return Err((GpStatus::InvalidArgument, format!("level {level} exceeds depth {}", h.0.depth())));
        }
        *out = u64::try_from(h.0.disc_count(level)).unwrap_or(u64::MAX);
        Ok(())
    })
}

/// Runs every construction check; writes the number of checks and failures.
///
/// # Safety
/// `h` must be a live handle; `checks` and `failures` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gp_hierarchy_validate(
    h: *const GpHierarchy,
    checks: *mut u64,
    failures: *mut u64,
) -> GpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("hierarchy"))?;
        if checks.is_null() || failures.is_null() {
            return Err(null("output"));
        }
        let r = validate_hierarchy(&h.0);
        *checks = r.checks.len() as u64;
        *failures = r.failures().len() as u64;
        Ok(())
    })
}

/// JSON description of the hierarchy with centers for at most `max_discs`
/// discs. Free the result with [`gp_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_hierarchy_to_json(
    h: *const GpHierarchy,
    max_discs: u64,
    out: *mut *mut c_char,
) -> GpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("hierarchy"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = owned(h.0.to_json(max_discs as u128).to_string())?;
        Ok(())
    })
}

/// Runs the full pipeline on a JSON configuration without writing files.
/// Writes the summary JSON and the process exit code the CLI would use.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `summary` and
/// `exit_code` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gp_run_pipeline(
    config_json: *const c_char,
    summary: *mut *mut c_char,
    exit_code: *mut i32,
) -> GpStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        if summary.is_null() || exit_code.is_null() {
            return Err(null("output"));
        }
        let cfg = lib(parse_config(text))?;
        let b = lib(run_pipeline(&cfg))?;
        let bytes = lib(to_json_bytes(&b.summary))?;
        *summary = owned(String::from_utf8(bytes).map_err(|e| (GpStatus::Utf8, e.to_string()))?)?;
        *exit_code = b.exit_code();
        Ok(())
    })
}
