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

use std::ffi::{CStr, CString};
use std::ptr;

use fkgfold_ffi::*;

const ISING: &str = r#"{"sites":["1","2"],"alphabets":[["0","1"],["0","1"]],"weights":["1/3","1/6","1/6","1/3"]}"#;

fn load(json: &str) -> *mut FkgMeasure {
    let text = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fkg_measure_from_json(text.as_ptr(), &mut m) }, FkgStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fkg_last_error()) }.to_str().unwrap().to_string()
}

fn check(m: *const FkgMeasure, kind: &str) -> (FkgStatus, bool, Option<String>) {
    let kind = CString::new(kind).unwrap();
    let mut verdict = false;
    let mut report = ptr::null_mut();
    let st = unsafe { fkg_check(m, kind.as_ptr(), &mut verdict, &mut report) };
    let text = (!report.is_null()).then(|| {
        let s = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_string();
        unsafe { fkg_string_free(report) };
        s
    });
    (st, verdict, text)
}

#[test]
fn round_trip_and_checks() {
    let m = load(ISING);
    assert_eq!(unsafe { fkg_measure_config_count(m) }, 4);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fkg_measure_to_json(m, &mut json) }, FkgStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    unsafe { fkg_string_free(json) };
    assert!(text.contains("\"1/6\""));

    let (st, verdict, report) = check(m, "fkg");
    assert_eq!(st, FkgStatus::Ok);
    assert!(verdict);
    assert!(report.unwrap().contains("\"verdict\":true"));
    let (st, verdict, _) = check(m, "nfkg");
    assert_eq!(st, FkgStatus::Ok);
    assert!(!verdict);
    let (st, _, _) = check(m, "bogus");
    assert_eq!(st, FkgStatus::InvalidArgument);
    assert!(last_error().contains("bogus"));

    let kind = CString::new("fkg-theorem").unwrap();
    let mut verdict = false;
    let st = unsafe { fkg_pipeline(m, kind.as_ptr(), &mut verdict, ptr::null_mut()) };
    assert_eq!(st, FkgStatus::Ok);
    assert!(verdict);
    let kind = CString::new("snfkg-rcr").unwrap();
    let st = unsafe { fkg_pipeline(m, kind.as_ptr(), &mut verdict, ptr::null_mut()) };
    assert_eq!(st, FkgStatus::PreconditionFailed);
    unsafe { fkg_measure_free(m) };
}

#[test]
fn folding() {
    let m = load(ISING);
    let path = CString::new(r#"[{"K":[],"alpha":[]}]"#).unwrap();
    let mut folded = ptr::null_mut();
    assert_eq!(unsafe { fkg_fold(m, path.as_ptr(), &mut folded) }, FkgStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fkg_measure_to_json(folded, &mut json) }, FkgStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    // (1/9, 1/36, 1/36, 1/9) normalized
    assert!(text.contains("\"2/5\"") && text.contains("\"1/10\""), "{text}");
    unsafe {
        fkg_string_free(json);
        fkg_measure_free(folded);
    }

    let bad = CString::new(r#"[{"K":["9"],"alpha":["0"]}]"#).unwrap();
    let mut out = ptr::null_mut();
    assert_ne!(unsafe { fkg_fold(m, bad.as_ptr(), &mut out) }, FkgStatus::Ok);
    assert!(out.is_null());

    let zero = load(r#"{"sites":["1","2"],"alphabets":[["0","1"],["0","1"]],"weights":["1","0","0","0"]}"#);
    let path = CString::new(r#"[{"K":[],"alpha":[]}]"#).unwrap();
    assert_eq!(unsafe { fkg_fold(zero, path.as_ptr(), &mut out) }, FkgStatus::FoldingUndefined);
    unsafe {
        fkg_measure_free(zero);
        fkg_measure_free(m);
    }
}

#[test]
fn errors_and_null_handling() {
    let mut m = ptr::null_mut();
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { fkg_measure_from_json(junk.as_ptr(), &mut m) }, FkgStatus::Parse);
    assert!(m.is_null());
    assert!(!last_error().is_empty());
    let zeros = CString::new(r#"{"sites":["1"],"alphabets":[["0","1"]],"weights":["0","0"]}"#).unwrap();
    assert_eq!(unsafe { fkg_measure_from_json(zeros.as_ptr(), &mut m) }, FkgStatus::InvalidMeasure);
    assert_eq!(unsafe { fkg_measure_from_json(ptr::null(), &mut m) }, FkgStatus::InvalidArgument);
    assert_eq!(unsafe { fkg_measure_config_count(ptr::null()) }, 0);
    let (st, _, _) = check(ptr::null(), "fkg");
    assert_eq!(st, FkgStatus::InvalidArgument);
    unsafe {
        fkg_measure_free(ptr::null_mut());
        fkg_string_free(ptr::null_mut());
    }
    // errors are per thread
    std::thread::spawn(|| assert!(fkg_last_error().is_null())).join().unwrap();
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/fkgfold.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["fkg_measure_from_json", "fkg_fold", "fkg_check", "fkg_pipeline", "fkg_last_error", "fkg_string_free"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        return; // no C compiler
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
