//! C ABI over `omegamb`.
//!
//! Objects are opaque handles created from their JSON formats and released
//! with the matching `*_free`. Every call returns an [`OmStatus`]; on failure
//! `om_last_error` describes the problem. Reports come back as JSON strings
//! owned by the caller and released with `om_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use omegamb::ops;
use omegamb::{Bpda, Cfg, LassoWord, TwoTapeBa};
use serde_json::json;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Panic = 4,
}

/// A context-free grammar.
pub struct OmCfg(Cfg);

/// A Büchi pushdown automaton.
pub struct OmBpda(Bpda);

/// A 2-tape Büchi automaton.
pub struct OmRelation(TwoTapeBa);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(OmStatus);

impl From<omegamb::Error> for Fail {
    fn from(e: omegamb::Error) -> Self {
        set_error(&e.to_string());
        Fail(OmStatus::InvalidInput)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OmStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            OmStatus::Panic
        }
    }
}

fn null() -> Fail {
    set_error("null pointer argument");
    Fail(OmStatus::NullPointer)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    // SAFETY: caller passes a NUL-terminated string
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        Fail(OmStatus::InvalidUtf8)
    })
}

unsafe fn lasso(p: *const c_char) -> Result<LassoWord, Fail> {
    Ok(unsafe { text(p) }?.parse::<LassoWord>()?)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    // SAFETY: non-null handles come from the matching constructor
    unsafe { p.as_ref() }.ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    // SAFETY: checked non-null, caller provides writable storage
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, v: serde_json::Value) -> Result<(), Fail> {
    let s = CString::new(v.to_string()).expect("JSON has no NUL");
    unsafe { put(out, s.into_raw()) }
}

/// Message of the last failed call on this thread. Valid until the next call.
#[no_mangle]
pub extern "C" fn om_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn om_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// # Safety
/// `json` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn om_cfg_from_json(json: *const c_char, out: *mut *mut OmCfg) -> OmStatus {
    guard(|| {
        let g = Cfg::from_json(unsafe { text(json) }?)?;
        unsafe { put(out, Box::into_raw(Box::new(OmCfg(g)))) }
    })
}

/// # Safety
/// `g` must come from `om_cfg_from_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn om_cfg_free(g: *mut OmCfg) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Writes `{"kind": "Exact"|"MoreThan"|"Infinite", "value": n}`.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_cfg_parse_count(
    g: *const OmCfg,
    word: *const c_char,
    cap: u64,
    out_json: *mut *mut c_char,
) -> OmStatus {
    guard(|| {
        let g = unsafe { handle(g) }?;
        let w: Vec<char> = unsafe { text(word) }?.chars().collect();
        let count = g.0.count_derivations(&w, cap);
        unsafe { put_json(out_json, json!(count)) }
    })
}

/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_adherence_member(g: *const OmCfg, lasso_word: *const c_char, out: *mut bool) -> OmStatus {
    guard(|| {
        let (g, w) = (unsafe { handle(g) }?, unsafe { lasso(lasso_word) }?);
        unsafe { put(out, ops::adherence_member(&g.0, &w).member) }
    })
}

/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_delta_limit_member(g: *const OmCfg, lasso_word: *const c_char, out: *mut bool) -> OmStatus {
    guard(|| {
        let (g, w) = (unsafe { handle(g) }?, unsafe { lasso(lasso_word) }?);
        unsafe { put(out, ops::delta_limit_member(&g.0, &w).member) }
    })
}

/// The BPDA accepting `L(g)^ω`.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_omega_power_bpda(g: *const OmCfg, out: *mut *mut OmBpda) -> OmStatus {
    guard(|| {
        let a = ops::omega_power_bpda(&unsafe { handle(g) }?.0);
        unsafe { put(out, Box::into_raw(Box::new(OmBpda(a)))) }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn om_bpda_from_json(json: *const c_char, out: *mut *mut OmBpda) -> OmStatus {
    guard(|| {
        let a = Bpda::from_json(unsafe { text(json) }?)?;
        unsafe { put(out, Box::into_raw(Box::new(OmBpda(a)))) }
    })
}

/// # Safety
/// `a` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn om_bpda_free(a: *mut OmBpda) {
    if !a.is_null() {
        drop(unsafe { Box::from_raw(a) });
    }
}

/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_bpda_accepts_lasso(
    a: *const OmBpda,
    lasso_word: *const c_char,
    out: *mut bool,
) -> OmStatus {
    guard(|| {
        let (a, w) = (unsafe { handle(a) }?, unsafe { lasso(lasso_word) }?);
        unsafe { put(out, a.0.accepts_lasso(&w)) }
    })
}

/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_bpda_is_empty(a: *const OmBpda, out: *mut bool) -> OmStatus {
    guard(|| unsafe { put(out, handle(a)?.0.is_empty()) })
}

/// Writes the bounded run-count report as JSON.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_bpda_count_runs(
    a: *const OmBpda,
    lasso_word: *const c_char,
    steps: usize,
    stack: usize,
    out_json: *mut *mut c_char,
) -> OmStatus {
    guard(|| {
        let (a, w) = (unsafe { handle(a) }?, unsafe { lasso(lasso_word) }?);
        let report = a.0.count_runs_bounded(&w, steps, stack);
        let v = serde_json::to_value(&report).map_err(omegamb::Error::from)?;
        unsafe { put_json(out_json, v) }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn om_relation_from_json(json: *const c_char, out: *mut *mut OmRelation) -> OmStatus {
    guard(|| {
        let t = TwoTapeBa::from_json(unsafe { text(json) }?)?;
        unsafe { put(out, Box::into_raw(Box::new(OmRelation(t)))) }
    })
}

/// # Safety
/// `t` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn om_relation_free(t: *mut OmRelation) {
    if !t.is_null() {
        drop(unsafe { Box::from_raw(t) });
    }
}

/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_relation_accepts(
    t: *const OmRelation,
    input: *const c_char,
    output: *const c_char,
    out: *mut bool,
) -> OmStatus {
    guard(|| {
        let t = unsafe { handle(t) }?;
        let (x, y) = (unsafe { lasso(input) }?, unsafe { lasso(output) }?);
        unsafe { put(out, t.0.accepts_pair(&x, &y)) }
    })
}

/// Writes `{"class": ..., "k": ...}`.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_relation_classify(
    t: *const OmRelation,
    input: *const c_char,
    output: *const c_char,
    out_json: *mut *mut c_char,
) -> OmStatus {
    guard(|| {
        let t = unsafe { handle(t) }?;
        let (x, y) = (unsafe { lasso(input) }?, unsafe { lasso(output) }?);
        unsafe { put_json(out_json, json!(t.0.classify_computations(&x, &y))) }
    })
}

/// The JSON of a built-in example, loadable by the `*_from_json` calls
/// through its `object` field.
///
/// # Safety
/// Pointers must be valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn om_corpus_dump(name: *const c_char, out_json: *mut *mut c_char) -> OmStatus {
    guard(|| {
        let v = omegamb::corpus::dump(unsafe { text(name) }?)?;
        unsafe { put_json(out_json, v) }
    })
}
