//! C ABI for `tnorm-risk`.
//!
//! Conventions:
//!
//! * Fallible functions return a [`TnrStatus`]; results go through out
//!   pointers, which are written only on success.
//! * After a non-`TNR_STATUS_OK` status, [`tnr_last_error`] describes the failure on
//!   the calling thread.
//! * Strings returned through `char **` are owned by the caller and must be
//!   released with [`tnr_string_free`]. Handles are released with their
//!   matching `_free` function.
//! * Panics never cross the boundary; they are reported as `TNR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tnorm_risk::{
    classify_with, default_ruleset, evaluate_with, generate_synthetic, load_dataset, load_ruleset,
    parse_case, Error, McNemarResult, Semantics, TNormKind, UnitScore,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Validation = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque rule set handle.
pub struct TnrRuleSet(tnorm_risk::RuleSet);

/// Opaque dataset handle.
pub struct TnrDataset(tnorm_risk::Dataset);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(TnrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => TnrStatus::Parse,
            Error::Validation { .. } => TnrStatus::Validation,
            Error::Io { .. } => TnrStatus::Io,
            Error::ScoreOutOfRange(_)
            | Error::EmptyChain
            | Error::UnknownTNorm(_)
            | Error::InvalidArgument(_) => TnrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TnrStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TnrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            TnrStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            TnrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TnrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn kind_arg(name: &str) -> Result<TNormKind, Failure> {
    Ok(name.parse::<TNormKind>()?)
}

/// NaN means "no override".
fn theta_arg(theta: f64) -> Result<Option<UnitScore>, Failure> {
    if theta.is_nan() {
        Ok(None)
    } else {
        Ok(Some(UnitScore::new(theta)?))
    }
}

/// A null `kind` selects mixed semantics.
unsafe fn semantics_arg(kind: *const c_char) -> Result<Semantics, Failure> {
    if kind.is_null() {
        Ok(Semantics::Mixed)
    } else {
        Ok(Semantics::Uniform(kind_arg(str_arg(kind, "kind")?)?))
    }
}

fn into_c_string(s: String) -> *mut c_char {
    // serialised JSON never contains interior NULs
    CString::new(s).expect("no interior NUL").into_raw()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tnr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tnr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The built-in rule set. Never returns null.
#[no_mangle]
pub extern "C" fn tnr_ruleset_default() -> *mut TnrRuleSet {
    Box::into_raw(Box::new(TnrRuleSet(default_ruleset())))
}

/// Loads and validates a JSON rule file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_ruleset_load(
    path: *const c_char,
    out: *mut *mut TnrRuleSet,
) -> TnrStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rs = load_ruleset(path)?;
        write_out(out, Box::into_raw(Box::new(TnrRuleSet(rs))), "out")
    })
}

/// Number of rules in the set, or 0 for null.
///
/// # Safety
/// `rules` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tnr_ruleset_len(rules: *const TnrRuleSet) -> usize {
    rules.as_ref().map_or(0, |r| r.0.rules().len())
}

/// # Safety
/// `rules` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn tnr_ruleset_free(rules: *mut TnrRuleSet) {
    if !rules.is_null() {
        drop(Box::from_raw(rules));
    }
}

/// Binary t-norm `T(a, b)`. `kind` is one of `lukasiewicz`, `product`,
/// `goedel`, `logproduct`.
///
/// # Safety
/// `kind` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_tnorm_apply(
    kind: *const c_char,
    a: f64,
    b: f64,
    out: *mut f64,
) -> TnrStatus {
    guard(|| {
        let kind = kind_arg(str_arg(kind, "kind")?)?;
        let v = tnorm_risk::apply(kind, UnitScore::new(a)?, UnitScore::new(b)?);
        write_out(out, v.value(), "out")
    })
}

/// Left fold of `len` scores.
///
/// # Safety
/// `scores` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_fold_chain(
    kind: *const c_char,
    scores: *const f64,
    len: usize,
    out: *mut f64,
) -> TnrStatus {
    guard(|| {
        let kind = kind_arg(str_arg(kind, "kind")?)?;
        if scores.is_null() && len > 0 {
            return Err(null("scores"));
        }
        let raw = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(scores, len)
        };
        let chain = raw
            .iter()
            .map(|&v| UnitScore::new(v))
            .collect::<tnorm_risk::Result<Vec<_>>>()?;
        let v = tnorm_risk::fold_chain(kind, &chain)?;
        write_out(out, v.value(), "out")
    })
}

/// Classifies one case given as JSON (`{"case_id": ..., "scores": {...}}`)
/// and returns the outcome with its proof trail as JSON. A null `kind`
/// selects mixed semantics; a NaN `theta` keeps each rule's own threshold.
///
/// # Safety
/// `rules` must be a live handle, `case_json` a NUL-terminated string, `kind`
/// null or NUL-terminated, and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_classify_json(
    rules: *const TnrRuleSet,
    case_json: *const c_char,
    kind: *const c_char,
    theta: f64,
    out_json: *mut *mut c_char,
) -> TnrStatus {
    guard(|| {
        let rules = &ref_arg(rules, "rules")?.0;
        let text = str_arg(case_json, "case_json")?;
        let semantics = semantics_arg(kind)?;
        let theta = theta_arg(theta)?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let (case_id, scores) = parse_case(text, "case_json", rules)?;
        let mut outcome = classify_with(&scores, rules, semantics, theta)?;
        if let Some(id) = case_id {
            outcome = outcome.with_case_id(id);
        }
        write_out(
            out_json,
            into_c_string(outcome.to_json_string()),
            "out_json",
        )
    })
}

/// Loads a JSONL benchmark, validating conditions against `rules`.
///
/// # Safety
/// `path` must be NUL-terminated, `rules` a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_dataset_load(
    path: *const c_char,
    rules: *const TnrRuleSet,
    out: *mut *mut TnrDataset,
) -> TnrStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let rules = &ref_arg(rules, "rules")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let ds = load_dataset(path, rules)?;
        write_out(out, Box::into_raw(Box::new(TnrDataset(ds))), "out")
    })
}

/// Deterministic synthetic benchmark of `n` cases.
///
/// # Safety
/// `rules` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_dataset_generate(
    n: usize,
    seed: u64,
    rules: *const TnrRuleSet,
    out: *mut *mut TnrDataset,
) -> TnrStatus {
    guard(|| {
        let rules = &ref_arg(rules, "rules")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let ds = generate_synthetic(n, seed, rules)?;
        write_out(out, Box::into_raw(Box::new(TnrDataset(ds))), "out")
    })
}

/// Number of cases, or 0 for null.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tnr_dataset_len(dataset: *const TnrDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Writes the dataset as JSONL.
///
/// # Safety
/// `dataset` must be a live handle and `out_jsonl` writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_dataset_to_jsonl(
    dataset: *const TnrDataset,
    out_jsonl: *mut *mut c_char,
) -> TnrStatus {
    guard(|| {
        let ds = &ref_arg(dataset, "dataset")?.0;
        if out_jsonl.is_null() {
            return Err(null("out_jsonl"));
        }
        write_out(out_jsonl, into_c_string(ds.to_jsonl_string()), "out_jsonl")
    })
}

/// # Safety
/// `dataset` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn tnr_dataset_free(dataset: *mut TnrDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Evaluation report (accuracy, directional errors, confusion matrix) as
/// JSON. `kind` and `theta` behave as in [`tnr_classify_json`].
///
/// # Safety
/// `dataset` and `rules` must be live handles, `kind` null or NUL-terminated,
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_evaluate_json(
    dataset: *const TnrDataset,
    rules: *const TnrRuleSet,
    kind: *const c_char,
    theta: f64,
    out_json: *mut *mut c_char,
) -> TnrStatus {
    guard(|| {
        let ds = &ref_arg(dataset, "dataset")?.0;
        let rules = &ref_arg(rules, "rules")?.0;
        let semantics = semantics_arg(kind)?;
        let theta = theta_arg(theta)?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let report = evaluate_with(ds, rules, semantics, theta)?;
        write_out(out_json, into_c_string(report.to_json_string()), "out_json")
    })
}

/// Exact McNemar test from discordant counts `b` (A right, B wrong) and `c`.
///
/// # Safety
/// `p_one_sided` and `p_two_sided` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnr_mcnemar(
    b: usize,
    c: usize,
    p_one_sided: *mut f64,
    p_two_sided: *mut f64,
) -> TnrStatus {
    guard(|| {
        if p_one_sided.is_null() || p_two_sided.is_null() {
            return Err(null("output pointer"));
        }
        let r = McNemarResult::from_counts(b, c);
        write_out(p_one_sided, r.p_one_sided, "p_one_sided")?;
        write_out(p_two_sided, r.p_two_sided, "p_two_sided")
    })
}
