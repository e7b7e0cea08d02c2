use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use affine_ffi::*;

const CIR: &str = r#"{"dims": {"m": 1, "n": 0}, "alpha": [[[1.0]]], "b": [1.0], "beta": [[-1.0]]}"#;
const NO_DRIFT: &str = r#"{"dims": {"m": 1, "n": 1}, "alpha": [[[1.0, 0.0], [0.0, 0.0]]], "b": [0.5, 0.0]}"#;

fn load(json: &str) -> (AffineStatus, *mut AffineModel) {
    let text = CString::new(json).unwrap();
    let mut model = ptr::null_mut();
    let status = unsafe { affine_model_from_json(text.as_ptr(), &mut model) };
    (status, model)
}

fn last_error() -> String {
    let p = affine_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn cir_transform_and_limit() {
    let (status, model) = load(CIR);
    assert_eq!(status, AffineStatus::Ok);
    assert!(affine_last_error_message().is_null());
    let (mut m, mut n) = (0, 0);
    assert_eq!(unsafe { affine_model_dims(model, &mut m, &mut n) }, AffineStatus::Ok);
    assert_eq!((m, n), (1, 0));

    let x = [3.0];
    let u = [AffineComplex { re: -1.0, im: 0.0 }];
    let mut out = AffineComplex { re: 0.0, im: 0.0 };
    let s = unsafe { affine_char_fn(model, x.as_ptr(), 1, 2f64.ln(), u.as_ptr(), 1, 1e-10, &mut out) };
    assert_eq!(s, AffineStatus::Ok);
    assert!((out.re - (-1.0f64).exp() / 1.5).abs() < 1e-8);

    let u = [AffineComplex { re: 0.0, im: 1.0 }];
    let s = unsafe { affine_stationary_cf(model, u.as_ptr(), 1, 1e-10, &mut out) };
    assert_eq!(s, AffineStatus::Ok);
    assert!((out.re - 0.5).abs() < 1e-7 && (out.im - 0.5).abs() < 1e-7);
    unsafe { affine_model_free(model) };
}

#[test]
fn error_codes() {
    let (status, model) = load("{ nope");
    assert_eq!(status, AffineStatus::Parse);
    assert!(model.is_null());
    assert!(last_error().contains("parse"));

    let (status, _) = load(&CIR.replace("\"b\": [1.0]", "\"b\": [-1.0]"));
    assert_eq!(status, AffineStatus::Inadmissible);

    let mut flag = -1;
    let text = CString::new(CIR.replace("\"b\": [1.0]", "\"b\": [-1.0]")).unwrap();
    assert_eq!(
        unsafe { affine_validate_json(text.as_ptr(), &mut flag) },
        AffineStatus::Ok
    );
    assert_eq!(flag, 0);
    assert!(!last_error().is_empty());

    let (status, model) = load(NO_DRIFT);
    assert_eq!(status, AffineStatus::Ok);
    let u = [AffineComplex { re: 0.0, im: 1.0 }, AffineComplex { re: 0.0, im: 0.0 }];
    let mut out = AffineComplex { re: 0.0, im: 0.0 };
    assert_eq!(
        unsafe { affine_stationary_cf(model, u.as_ptr(), 2, 1e-8, &mut out) },
        AffineStatus::NotErgodic
    );
    assert!(last_error().contains("spectral"));
    assert_eq!(
        unsafe { affine_stationary_cf(model, u.as_ptr(), 1, 1e-8, &mut out) },
        AffineStatus::Parse
    );
    assert_eq!(
        unsafe { affine_stationary_cf(ptr::null(), u.as_ptr(), 2, 1e-8, &mut out) },
        AffineStatus::NullPointer
    );
    unsafe { affine_model_free(model) };
    unsafe { affine_model_free(ptr::null_mut()) };
}

/// Builds the C smoke program against the generated header and static library.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // the test binary sits next to the freshly built library in deps/
    let lib = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .join("libaffine_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
