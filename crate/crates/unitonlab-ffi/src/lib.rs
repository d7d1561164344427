//! C ABI for the unitonlab pipeline.
//!
//! Conventions: functions return a `UnitonStatus` code; results come back
//! through out-parameters. Heap objects cross the boundary as opaque
//! handles with explicit `_free` functions; strings returned by this
//! library must be released with `uniton_string_free`. On any error the
//! thread-local message retrieved by `uniton_last_error_message` describes
//! the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use unitonlab::dpw::{picard_integrate, MeromorphicFrame};
use unitonlab::factor::{birkhoff, iwasawa, IwasawaRoute};
use unitonlab::jsonio::{
    builtin_potential, frame_to_json, loop_from_json, loop_to_json, potential_from_json,
    JsonValue,
};
use unitonlab::liealg::FormSpec;
use unitonlab::pipeline::{run_pipeline, PipelineConfig};
use unitonlab::potentials::NormalizedPotential;
use unitonlab::willmore::eval_s6_example;
use unitonlab::UnitonError;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum UnitonStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ConstraintViolated = 4,
    CellViolation = 5,
    FactorizationFailed = 6,
    NumericalError = 7,
    ChecksFailed = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let cstring = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &UnitonError) -> UnitonStatus {
    match err {
        UnitonError::Parse(_) | UnitonError::Json(_) => UnitonStatus::ParseError,
        UnitonError::ConstraintViolated(_) => UnitonStatus::ConstraintViolated,
        UnitonError::CellViolation(_) => UnitonStatus::CellViolation,
        UnitonError::Factorization(_) | UnitonError::PicardNoTermination { .. } => {
            UnitonStatus::FactorizationFailed
        }
        _ => UnitonStatus::NumericalError,
    }
}

fn guarded(f: impl FnOnce() -> UnitonStatus) -> UnitonStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic".into());
            UnitonStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, UnitonStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(UnitonStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        UnitonStatus::InvalidUtf8
    })
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Opaque handle around a validated normalized potential.
pub struct UnitonPotential {
    inner: NormalizedPotential,
}

/// Opaque handle around an integrated meromorphic frame.
pub struct UnitonFrame {
    inner: MeromorphicFrame,
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn uniton_version() -> *const c_char {
    concat!("unitonlab ", env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message for this thread, or NULL. Free with
/// `uniton_string_free`.
#[no_mangle]
pub extern "C" fn uniton_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| to_c_string(s.to_string_lossy().into_owned()))
            .unwrap_or(std::ptr::null_mut())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a unitonlab function and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uniton_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluate the S⁶ Willmore two-sphere family at (z, λ), λ on the unit
/// circle; writes 7 components into `out`.
///
/// # Safety
/// `out` must point to at least 7 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn uniton_s6_eval(
    z_re: f64,
    z_im: f64,
    lambda_re: f64,
    lambda_im: f64,
    out: *mut f64,
) -> UnitonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output buffer".into());
            return UnitonStatus::NullArgument;
        }
        match eval_s6_example(
            Complex64::new(z_re, z_im),
            Complex64::new(lambda_re, lambda_im),
        ) {
            Ok(v) => {
                std::ptr::copy_nonoverlapping(v.as_ptr(), out, 7);
                UnitonStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Parse a potential spec (JSON) into an opaque handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uniton_potential_parse_json(
    json: *const c_char,
    out: *mut *mut UnitonPotential,
) -> UnitonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output handle".into());
            return UnitonStatus::NullArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match potential_from_json(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(UnitonPotential { inner: p }));
                UnitonStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Load a built-in potential: "s6-example" or "s4-family".
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uniton_potential_builtin(
    name: *const c_char,
    out: *mut *mut UnitonPotential,
) -> UnitonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output handle".into());
            return UnitonStatus::NullArgument;
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match builtin_potential(name) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(UnitonPotential { inner: p }));
                UnitonStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `p` must come from a `uniton_potential_*` constructor (or be NULL) and
/// not already freed.
#[no_mangle]
pub unsafe extern "C" fn uniton_potential_free(p: *mut UnitonPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Exact Picard integration of a potential from base point z₀.
/// `max_steps` = 0 uses the potential's nilpotency certificate.
///
/// # Safety
/// `pot` must be a live potential handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uniton_picard_integrate(
    pot: *const UnitonPotential,
    z0_re: f64,
    z0_im: f64,
    max_steps: usize,
    out: *mut *mut UnitonFrame,
) -> UnitonStatus {
    guarded(|| {
        if pot.is_null() || out.is_null() {
            set_error("null argument".into());
            return UnitonStatus::NullArgument;
        }
        let pot = &(*pot).inner;
        match picard_integrate(pot, Complex64::new(z0_re, z0_im), max_steps) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(UnitonFrame { inner: f }));
                UnitonStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `f` must come from `uniton_picard_integrate` (or be NULL) and not
/// already freed.
#[no_mangle]
pub unsafe extern "C" fn uniton_frame_free(f: *mut UnitonFrame) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of Picard steps the integration used.
///
/// # Safety
/// `f` must be a live frame handle.
#[no_mangle]
pub unsafe extern "C" fn uniton_frame_steps(f: *const UnitonFrame) -> usize {
    if f.is_null() {
        return 0;
    }
    (*f).inner.steps_used
}

/// Serialize a frame to JSON. Free the result with `uniton_string_free`.
///
/// # Safety
/// `f` must be a live frame handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uniton_frame_to_json(
    f: *const UnitonFrame,
    out: *mut *mut c_char,
) -> UnitonStatus {
    guarded(|| {
        if f.is_null() || out.is_null() {
            set_error("null argument".into());
            return UnitonStatus::NullArgument;
        }
        *out = to_c_string(frame_to_json(&(*f).inner).render());
        UnitonStatus::Ok
    })
}

/// Evaluate the frame at z as a loop JSON. Free with `uniton_string_free`.
///
/// # Safety
/// `f` must be a live frame handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uniton_frame_loop_at(
    f: *const UnitonFrame,
    z_re: f64,
    z_im: f64,
    out: *mut *mut c_char,
) -> UnitonStatus {
    guarded(|| {
        if f.is_null() || out.is_null() {
            set_error("null argument".into());
            return UnitonStatus::NullArgument;
        }
        let lp = (*f).inner.eval_loop(Complex64::new(z_re, z_im));
        *out = to_c_string(loop_to_json(&lp).render());
        UnitonStatus::Ok
    })
}

fn willmore_form_for(dim: usize) -> Result<FormSpec, UnitonError> {
    if dim < 5 {
        return Err(UnitonError::InvalidArgument(
            "loop dimension too small for the Willmore form".into(),
        ));
    }
    Ok(FormSpec::willmore(dim - 4))
}

/// Birkhoff factorization of a loop (JSON in, JSON out). `depth` < 0 picks
/// the default ansatz. Free the result with `uniton_string_free`.
///
/// # Safety
/// `loop_json` must be a valid NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uniton_birkhoff_json(
    loop_json: *const c_char,
    depth: i32,
    tol: f64,
    out: *mut *mut c_char,
) -> UnitonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output".into());
            return UnitonStatus::NullArgument;
        }
        let text = match read_str(loop_json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let run = || -> Result<(String, bool), UnitonError> {
            let lp = loop_from_json(text)?;
            let form = willmore_form_for(lp.dim())?;
            let res = birkhoff(
                &lp,
                Some(&form.ambient),
                if depth < 0 { None } else { Some(depth as usize) },
                tol,
            )?;
            let json = JsonValue::Object(vec![
                ("f_minus".into(), loop_to_json(&res.f_minus)),
                ("f_plus".into(), loop_to_json(&res.f_plus)),
                ("residual".into(), JsonValue::Float(res.residual)),
                ("in_big_cell".into(), JsonValue::Bool(res.in_big_cell)),
            ])
            .render();
            Ok((json, res.in_big_cell))
        };
        match run() {
            Ok((json, in_cell)) => {
                *out = to_c_string(json);
                if in_cell {
                    UnitonStatus::Ok
                } else {
                    set_error("loop outside the big Birkhoff cell".into());
                    UnitonStatus::CellViolation
                }
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Iwasawa factorization of a loop (JSON in, JSON out); `compact` ≠ 0 uses
/// the compact real form. Free the result with `uniton_string_free`.
///
/// # Safety
/// `loop_json` must be a valid NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uniton_iwasawa_json(
    loop_json: *const c_char,
    compact: i32,
    tol: f64,
    out: *mut *mut c_char,
) -> UnitonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output".into());
            return UnitonStatus::NullArgument;
        }
        let text = match read_str(loop_json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let run = || -> Result<String, UnitonError> {
            let lp = loop_from_json(text)?;
            let form = willmore_form_for(lp.dim())?;
            let route = if compact != 0 {
                IwasawaRoute::Compact
            } else {
                IwasawaRoute::Noncompact
            };
            let res = iwasawa(&lp, &form, route, tol)?;
            Ok(JsonValue::Object(vec![
                ("f_real".into(), loop_to_json(&res.f_real)),
                ("f_plus".into(), loop_to_json(&res.f_plus)),
                ("reconstruction_residual".into(), JsonValue::Float(res.residual)),
                ("reality_residual".into(), JsonValue::Float(res.reality_residual)),
                ("twist_residual".into(), JsonValue::Float(res.twist_residual)),
            ])
            .render())
        };
        match run() {
            Ok(json) => {
                *out = to_c_string(json);
                UnitonStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Run the full pipeline from a config JSON; writes the report JSON to
/// `out` (free with `uniton_string_free`). Returns `ChecksFailed` when the
/// run finished but an invariant failed its tolerance.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uniton_run_pipeline_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> UnitonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output".into());
            return UnitonStatus::NullArgument;
        }
        let text = match read_str(config_json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let run = || -> Result<(String, bool), UnitonError> {
            let cfg = PipelineConfig::from_json(text)?;
            let report = run_pipeline(&cfg)?;
            Ok((report.to_json().render(), report.passed()))
        };
        match run() {
            Ok((json, passed)) => {
                *out = to_c_string(json);
                if passed {
                    UnitonStatus::Ok
                } else {
                    set_error("pipeline checks failed; see report".into());
                    UnitonStatus::ChecksFailed
                }
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}
