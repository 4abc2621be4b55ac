// Copyright 2026 The fkgfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! C ABI over the measure, folding and association API.
//!
//! Handles are opaque. Every fallible function returns an [`FkgStatus`];
//! on failure the message is available from [`fkg_last_error`] on the same
//! thread. Strings returned through out-pointers are owned by the caller and
//! released with [`fkg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fkgfold::association::{
    fkg_theorem_pipeline, is_fkg, is_na, is_nfkg, is_pa, is_snfkg, snfkg_limit_rcr,
};
use fkgfold::folding::{fold_path, FoldPath};
use fkgfold::{Error, Measure};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FkgStatus {
    Ok = 0,
    /// A null pointer, bad UTF-8 or an unknown name.
    InvalidArgument = 1,
    /// Malformed JSON or rationals.
    Parse = 2,
    /// Weights or events do not fit the space.
    InvalidMeasure = 3,
    CapExceeded = 4,
    FoldingUndefined = 5,
    MalformedFoldSpec = 6,
    PreconditionFailed = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

/// Opaque measure handle.
pub struct FkgMeasure {
    inner: Measure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FkgStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => FkgStatus::Parse,
        Error::CapExceeded { .. } => FkgStatus::CapExceeded,
        Error::FoldingUndefined => FkgStatus::FoldingUndefined,
        Error::MalformedFoldSpec(_) => FkgStatus::MalformedFoldSpec,
        Error::PreconditionFailed(_) => FkgStatus::PreconditionFailed,
        Error::InvalidParams(_) | Error::Io(_) => FkgStatus::InvalidArgument,
        _ => FkgStatus::InvalidMeasure,
    }
}

struct Fail(FkgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FkgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FkgStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FkgStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(FkgStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FkgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn measure_arg<'a>(m: *const FkgMeasure) -> Result<&'a Measure, Fail> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| Fail(FkgStatus::InvalidArgument, "measure handle is null".into()))
}

fn out_check<T>(out: *mut T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FkgStatus::InvalidArgument, format!("{what} is null")));
    }
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Parses a measure from its JSON form.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fkg_measure_from_json(json: *const c_char, out: *mut *mut FkgMeasure) -> FkgStatus {
    guard(|| {
        out_check(out, "out")?;
        let text = str_arg(json, "json")?;
        let inner = Measure::from_json_str(text)?;
        *out = Box::into_raw(Box::new(FkgMeasure { inner }));
        Ok(())
    })
}

/// Writes the JSON form of a measure; free it with [`fkg_string_free`].
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fkg_measure_to_json(m: *const FkgMeasure, out: *mut *mut c_char) -> FkgStatus {
    guard(|| {
        out_check(out, "out")?;
        *out = into_c_string(measure_arg(m)?.to_json_string());
        Ok(())
    })
}

/// Number of configurations of the measure's space; 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkg_measure_config_count(m: *const FkgMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.inner.len())
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkg_measure_free(m: *mut FkgMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Applies a fold path given as JSON and returns a new handle.
///
/// # Safety
/// `m` must be a live handle, `path_json` nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fkg_fold(
    m: *const FkgMeasure,
    path_json: *const c_char,
    out: *mut *mut FkgMeasure,
) -> FkgStatus {
    guard(|| {
        out_check(out, "out")?;
        let p = measure_arg(m)?;
        let path = FoldPath::from_json_str(p.space(), str_arg(path_json, "path_json")?)?;
        let inner = fold_path(p, &path)?;
        *out = Box::into_raw(Box::new(FkgMeasure { inner }));
        Ok(())
    })
}

/// Runs `fkg`, `pa`, `na`, `nfkg` or `snfkg`. The verdict goes to `verdict`
/// and, when `report` is not null, the JSON report to `*report`.
///
/// # Safety
/// `m` must be a live handle, `kind` nul-terminated, `verdict` writable and
/// `report` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fkg_check(
    m: *const FkgMeasure,
    kind: *const c_char,
    verdict: *mut bool,
    report: *mut *mut c_char,
) -> FkgStatus {
    guard(|| {
        out_check(verdict, "verdict")?;
        let p = measure_arg(m)?;
        let r = match str_arg(kind, "kind")? {
            "fkg" => is_fkg(p)?,
            "pa" => is_pa(p)?,
            "na" => is_na(p)?,
            "nfkg" => is_nfkg(p)?,
            "snfkg" => is_snfkg(p)?,
            other => return Err(Fail(FkgStatus::InvalidArgument, format!("unknown check `{other}`"))),
        };
        *verdict = r.verdict;
        if !report.is_null() {
            *report = into_c_string(serde_json::to_string(&r).expect("report serializes"));
        }
        Ok(())
    })
}

/// Runs the `fkg-theorem` or `snfkg-rcr` pipeline, like [`fkg_check`].
///
/// # Safety
/// As for [`fkg_check`].
#[no_mangle]
pub unsafe extern "C" fn fkg_pipeline(
    m: *const FkgMeasure,
    kind: *const c_char,
    verdict: *mut bool,
    report: *mut *mut c_char,
) -> FkgStatus {
    guard(|| {
        out_check(verdict, "verdict")?;
        let p = measure_arg(m)?;
        let r = match str_arg(kind, "kind")? {
            "fkg-theorem" => fkg_theorem_pipeline(p)?,
            "snfkg-rcr" => snfkg_limit_rcr(p)?,
            other => return Err(Fail(FkgStatus::InvalidArgument, format!("unknown pipeline `{other}`"))),
        };
        *verdict = r.verdict;
        if !report.is_null() {
            *report = into_c_string(serde_json::to_string(&r).expect("report serializes"));
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn fkg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
