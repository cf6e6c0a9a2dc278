//! C ABI over the stormgrid pipeline.
//!
//! Conventions: functions returning a pointer yield NULL on failure;
//! functions returning [`SgStatus`] yield `SG_STATUS_OK` (0) on success and
//! a negative code otherwise. After any failure, [`sg_last_error`] returns
//! a heap-allocated message for the calling thread; free it (and every
//! other returned string) with [`sg_string_free`]. Handles are opaque and
//! single-owner: free an assessment exactly once with
//! [`sg_assessment_free`]. Panics never unwind across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use stormgrid::config::{Overrides, RunConfig};
use stormgrid::geo::GeoPoint;
use stormgrid::pipeline;
use stormgrid::typhoon::{self, TyphoonParameters};

/// Status codes returned by fallible functions.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    /// A pointer argument was NULL or an index was out of range.
    InvalidArgument = -1,
    /// Configuration or input files failed to load or validate.
    Validation = -2,
    /// The numeric pipeline failed (reported with its stage).
    Numeric = -3,
    /// A string was not valid UTF-8.
    Utf8 = -4,
    /// An internal panic was caught at the boundary.
    Panic = -5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<T>(fallback: T, body: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(v) => v,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {message}"));
            fallback
        }
    }
}

/// Completed resilience assessment. Opaque; query through the accessors.
pub struct SgAssessment {
    r_sys_mw: f64,
    meets_target: bool,
    scenario_count: usize,
    j_max: usize,
    /// (corridor id, R_m) sorted by descending index.
    corridors: Vec<(u32, f64)>,
}

/// Toolkit version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message of the calling thread as a heap string, or NULL when
/// no error was recorded. Free with [`sg_string_free`].
#[no_mangle]
pub extern "C" fn sg_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Free a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a function of this library and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, SgStatus> {
    if ptr.is_null() {
        set_last_error("config path is NULL".into());
        return Err(SgStatus::InvalidArgument);
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_last_error("config path is not valid UTF-8".into());
            Err(SgStatus::Utf8)
        }
    }
}

/// Run the full resilience assessment described by a run-configuration
/// file. Blocking; returns NULL on failure (see [`sg_last_error`]). The
/// result must be freed with [`sg_assessment_free`].
///
/// # Safety
/// `config_path` must be a NUL-terminated string valid for the call.
#[no_mangle]
pub unsafe extern "C" fn sg_assess_run(config_path: *const c_char) -> *mut SgAssessment {
    guard(std::ptr::null_mut(), || {
        let path = match unsafe { path_from(config_path) } {
            Ok(p) => p,
            Err(_) => return std::ptr::null_mut(),
        };
        let config = match RunConfig::load(path, &Overrides::default()) {
            Ok(c) => c,
            Err(e) => {
                set_last_error(format!("[config] {e}"));
                return std::ptr::null_mut();
            }
        };
        let inputs = match pipeline::load_inputs(&config) {
            Ok(i) => i,
            Err(e) => {
                set_last_error(e.to_string());
                return std::ptr::null_mut();
            }
        };
        match pipeline::assess(&config, &inputs) {
            Ok(outcome) => Box::into_raw(Box::new(SgAssessment {
                r_sys_mw: outcome.report.r_sys_mw,
                meets_target: outcome.meets_target,
                scenario_count: outcome.report.scenario_count,
                j_max: outcome.report.j_max,
                corridors: outcome.report.corridor_indices.clone(),
            })),
            Err(e) => {
                set_last_error(e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

/// Free an assessment handle. NULL is ignored.
///
/// # Safety
/// `assessment` must come from [`sg_assess_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_free(assessment: *mut SgAssessment) {
    if !assessment.is_null() {
        drop(unsafe { Box::from_raw(assessment) });
    }
}

/// System resilience index in MW, or NaN for a NULL handle.
///
/// # Safety
/// `assessment` must be a live handle from [`sg_assess_run`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_r_sys_mw(assessment: *const SgAssessment) -> f64 {
    match unsafe { assessment.as_ref() } {
        Some(a) => a.r_sys_mw,
        None => f64::NAN,
    }
}

/// 1 when the index meets the configured target, 0 when it does not, -1
/// for a NULL handle.
///
/// # Safety
/// `assessment` must be a live handle from [`sg_assess_run`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_meets_target(assessment: *const SgAssessment) -> i32 {
    match unsafe { assessment.as_ref() } {
        Some(a) => a.meets_target as i32,
        None => -1,
    }
}

/// Number of scenarios the assessment aggregated; 0 for NULL.
///
/// # Safety
/// `assessment` must be a live handle from [`sg_assess_run`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_scenario_count(assessment: *const SgAssessment) -> usize {
    unsafe { assessment.as_ref() }.map_or(0, |a| a.scenario_count)
}

/// Enumeration order the assessment used; 0 for NULL.
///
/// # Safety
/// `assessment` must be a live handle from [`sg_assess_run`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_j_max(assessment: *const SgAssessment) -> usize {
    unsafe { assessment.as_ref() }.map_or(0, |a| a.j_max)
}

/// Number of corridor index entries; 0 for NULL.
///
/// # Safety
/// `assessment` must be a live handle from [`sg_assess_run`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_corridor_count(assessment: *const SgAssessment) -> usize {
    unsafe { assessment.as_ref() }.map_or(0, |a| a.corridors.len())
}

/// Corridor index entry `index` (sorted by descending R_m): writes the
/// corridor id and its index in MW through the out pointers.
///
/// # Safety
/// `assessment` must be a live handle; `id_out` and `r_m_out` must be valid
/// for writes or NULL (in which case that field is skipped).
#[no_mangle]
pub unsafe extern "C" fn sg_assessment_corridor(
    assessment: *const SgAssessment,
    index: usize,
    id_out: *mut u32,
    r_m_out: *mut f64,
) -> SgStatus {
    let Some(a) = (unsafe { assessment.as_ref() }) else {
        set_last_error("assessment handle is NULL".into());
        return SgStatus::InvalidArgument;
    };
    let Some(&(id, r_m)) = a.corridors.get(index) else {
        set_last_error(format!(
            "corridor index {index} out of range ({} entries)",
            a.corridors.len()
        ));
        return SgStatus::InvalidArgument;
    };
    if !id_out.is_null() {
        unsafe { *id_out = id };
    }
    if !r_m_out.is_null() {
        unsafe { *r_m_out = r_m };
    }
    SgStatus::Ok
}

/// Stateless wind-field sample: evolve a storm from the given parameters to
/// `t_hours` and write wind speed (m/s) and flow bearing (degrees from
/// north) at the query point.
///
/// # Safety
/// `speed_out` and `direction_out` must be valid for writes or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_wind_at(
    delta_p0_hpa: f64,
    heading_deg: f64,
    vt_kmh: f64,
    landfall_lat: f64,
    landfall_lon: f64,
    k_coeff: f64,
    t_hours: f64,
    lat: f64,
    lon: f64,
    speed_out: *mut f64,
    direction_out: *mut f64,
) -> SgStatus {
    guard(SgStatus::Panic, || {
        let params = TyphoonParameters {
            delta_p0_hpa,
            heading_deg,
            vt_kmh,
            landfall: GeoPoint::new(landfall_lat, landfall_lon),
            k_coeff,
            dt_min: 10.0,
        };
        if let Err(e) = params.validate() {
            set_last_error(e.to_string());
            return SgStatus::Validation;
        }
        if t_hours < 0.0 || !t_hours.is_finite() {
            set_last_error(format!("t_hours must be finite and >= 0, got {t_hours}"));
            return SgStatus::InvalidArgument;
        }
        let state = typhoon::storm_state(&params, t_hours);
        let sample = typhoon::wind_at(&state, GeoPoint::new(lat, lon));
        if !speed_out.is_null() {
            unsafe { *speed_out = sample.speed_ms };
        }
        if !direction_out.is_null() {
            unsafe { *direction_out = sample.direction_deg };
        }
        SgStatus::Ok
    })
}
