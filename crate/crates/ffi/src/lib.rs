//! C interface to `affine-core`.
//!
//! Every entry point returns an [`AffineStatus`]. On failure a message is
//! kept per thread and can be read with [`affine_last_error_message`].
//! Models are opaque handles created by [`affine_model_from_json`] and
//! released with [`affine_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use affine_core::model::spec_file::ModelSpec;
use affine_core::model::validate_admissible;
use affine_core::riccati::char_fn;
use affine_core::stationary::stationary_cf;
use affine_core::{AdmissibleParameters, AffineError, ComplexArgument};
use num_complex::Complex64;

/// Result codes. Values 1 to 5 match the exit codes of the `affine` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffineStatus {
    Ok = 0,
    Inadmissible = 1,
    Parse = 2,
    Numerical = 3,
    NotErgodic = 4,
    Unsupported = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Complex number with C layout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque model handle.
pub struct AffineModel {
    params: AdmissibleParameters,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &AffineError) -> AffineStatus {
    match e.exit_code() {
        1 => AffineStatus::Inadmissible,
        2 => AffineStatus::Parse,
        4 => AffineStatus::NotErgodic,
        5 => AffineStatus::Unsupported,
        _ => AffineStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Core(AffineError),
}

impl From<AffineError> for Failure {
    fn from(e: AffineError) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AffineStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AffineStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            AffineStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            AffineStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| AffineError::Parse(format!("{what} is not UTF-8")).into())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn model<'a>(m: *const AffineModel) -> Result<&'a AffineModel, Failure> {
    m.as_ref().ok_or(Failure::Null("model"))
}

unsafe fn argument(m: &AffineModel, u: *const AffineComplex, len: usize) -> Result<ComplexArgument, Failure> {
    let values = slice(u, len, "u")?.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    Ok(ComplexArgument::new(m.params.dims, values)?)
}

fn parse(json: &str) -> Result<AdmissibleParameters, AffineError> {
    ModelSpec::parse(json)?.to_params()
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn affine_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a model file, checks admissibility and returns a new handle in `out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn affine_model_from_json(json: *const c_char, out: *mut *mut AffineModel) -> AffineStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let params = parse(text(json, "json")?)?;
        validate_admissible(&params)?.into_result()?;
        *out = Box::into_raw(Box::new(AffineModel { params }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`affine_model_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn affine_model_free(model: *mut AffineModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes 1 to `admissible` if the model file passes every admissibility
/// condition and 0 otherwise; the failing conditions go to the error message.
///
/// # Safety
/// `json` must be a NUL-terminated string and `admissible` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn affine_validate_json(json: *const c_char, admissible: *mut c_int) -> AffineStatus {
    let mut failures = None;
    let status = guard(|| {
        if admissible.is_null() {
            return Err(Failure::Null("admissible"));
        }
        let report = validate_admissible(&parse(text(json, "json")?)?)?;
        *admissible = c_int::from(report.admissible);
        if let Err(e) = report.into_result() {
            failures = Some(e.to_string());
        }
        Ok(())
    });
    if let Some(msg) = failures {
        set_error(msg);
    }
    status
}

/// State dimensions `m` (nonnegative block) and `n` (real block).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn affine_model_dims(model: *const AffineModel, m: *mut usize, n: *mut usize) -> AffineStatus {
    guard(|| {
        let mdl = self::model(model)?;
        if m.is_null() || n.is_null() {
            return Err(Failure::Null("m or n"));
        }
        *m = mdl.params.dims.m;
        *n = mdl.params.dims.n;
        Ok(())
    })
}

/// `E_x[exp(<u, X_t>)]` with `x` of length `x_len` and `u` of length `u_len`.
///
/// # Safety
/// `x` and `u` must point to `x_len` and `u_len` elements, `out` must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn affine_char_fn(
    model: *const AffineModel,
    x: *const f64,
    x_len: usize,
    t: f64,
    u: *const AffineComplex,
    u_len: usize,
    tol: f64,
    out: *mut AffineComplex,
) -> AffineStatus {
    guard(|| {
        let mdl = self::model(model)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let arg = argument(mdl, u, u_len)?;
        let v = char_fn(&mdl.params, slice(x, x_len, "x")?, t, &arg, tol)?;
        *out = AffineComplex { re: v.re, im: v.im };
        Ok(())
    })
}

/// Characteristic function of the limiting distribution at `u`.
/// Fails with [`AffineStatus::NotErgodic`] when the model is not ergodic.
///
/// # Safety
/// `u` must point to `u_len` elements, `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn affine_stationary_cf(
    model: *const AffineModel,
    u: *const AffineComplex,
    u_len: usize,
    tol: f64,
    out: *mut AffineComplex,
) -> AffineStatus {
    guard(|| {
        let mdl = self::model(model)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let arg = argument(mdl, u, u_len)?;
        let v = stationary_cf(&mdl.params, &arg, tol)?.value;
        *out = AffineComplex { re: v.re, im: v.im };
        Ok(())
    })
}
