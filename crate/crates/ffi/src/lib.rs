//! C ABI over the deterministic evaluation primitives: response parsing,
//! verdict classification, metric computation, and variability counting.
//!
//! Conventions: functions return an `NjStatus` code and write results through
//! out-pointers; parsed evaluations are opaque handles freed with
//! [`nj_evaluation_free`]; strings returned to the caller are freed with
//! [`nj_string_free`]. The generated header lives in `include/newsjudge.h`.

use libc::{c_char, c_double, size_t};
use newsjudge::classify::{classify, Orientation, ThresholdPolicy};
use newsjudge::domain::{ConfidenceLevel, RejectReason, Verdict};
use newsjudge::metrics::{compute_metrics, ConfusionCounts};
use newsjudge::parser::{extract_confidence, parse_response, ParseFailureReason, ParsedEvaluation};
use newsjudge::score::Score;
use std::ffi::{CStr, CString};
use std::ptr;

/// Result codes. Values above `NjStatusParseNoList` mirror the parser's
/// failure reasons.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NjStatus {
    NjStatusOk = 0,
    NjStatusNullArgument = 1,
    NjStatusInvalidUtf8 = 2,
    NjStatusIndexOutOfRange = 3,
    NjStatusNotAnswered = 4,
    NjStatusInvalidArgument = 5,
    NjStatusParseNoList = 10,
    NjStatusParseWrongArity = 11,
    NjStatusParseOutOfRange = 12,
    NjStatusParseMalformedElement = 13,
}

/// Confidence levels as stated by the model.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NjConfidence {
    NjConfidenceHigh = 0,
    NjConfidenceMedium = 1,
    NjConfidenceLow = 2,
    NjConfidenceUnstated = 3,
}

/// Verdicts produced by the threshold rule.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NjVerdict {
    NjVerdictReal = 0,
    NjVerdictFake = 1,
    NjVerdictRejected = 2,
}

/// Threshold orientation: scale-consistent calls q6 >= threshold Fake.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NjOrientation {
    NjOrientationScaleConsistent = 0,
    NjOrientationPaperLiteral = 1,
}

/// Headline rates computed from confusion counts. Undefined rates (0/0)
/// are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NjMetrics {
    pub total: u64,
    pub recall: c_double,
    pub specificity: c_double,
    pub precision: c_double,
    pub f1: c_double,
    pub accuracy: c_double,
    pub rejection_rate: c_double,
}

/// Opaque parsed evaluation handle.
pub struct NjEvaluation {
    inner: ParsedEvaluation,
}

fn confidence_out(level: ConfidenceLevel) -> NjConfidence {
    match level {
        ConfidenceLevel::High => NjConfidence::NjConfidenceHigh,
        ConfidenceLevel::Medium => NjConfidence::NjConfidenceMedium,
        ConfidenceLevel::Low => NjConfidence::NjConfidenceLow,
        ConfidenceLevel::Unstated => NjConfidence::NjConfidenceUnstated,
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn nj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// SHA-256 hex digest of the shipped rubric prompt. Free with
/// [`nj_string_free`].
#[no_mangle]
pub extern "C" fn nj_prompt_digest() -> *mut c_char {
    let digest = newsjudge::digest::sha256_hex(newsjudge::prompting::PROMPT_RESOURCE.as_bytes());
    CString::new(digest).map_or(ptr::null_mut(), CString::into_raw)
}

/// Parses a model reply. On success writes a handle to `out_eval`; on a
/// parse failure returns the matching `NjStatusParse*` code and writes NULL.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out_eval` a valid
/// pointer; the returned handle must be freed with [`nj_evaluation_free`].
#[no_mangle]
pub unsafe extern "C" fn nj_parse_response(
    text: *const c_char,
    out_eval: *mut *mut NjEvaluation,
) -> NjStatus {
    if text.is_null() || out_eval.is_null() {
        return NjStatus::NjStatusNullArgument;
    }
    *out_eval = ptr::null_mut();
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return NjStatus::NjStatusInvalidUtf8;
    };
    match parse_response(text) {
        Ok(parsed) => {
            *out_eval = Box::into_raw(Box::new(NjEvaluation { inner: parsed }));
            NjStatus::NjStatusOk
        }
        Err(failure) => match failure.reason {
            ParseFailureReason::NoListFound => NjStatus::NjStatusParseNoList,
            ParseFailureReason::WrongArity => NjStatus::NjStatusParseWrongArity,
            ParseFailureReason::OutOfRange => NjStatus::NjStatusParseOutOfRange,
            ParseFailureReason::MalformedElement => NjStatus::NjStatusParseMalformedElement,
        },
    }
}

/// Reads rating `index` (0..=5, question order). Unanswered ratings return
/// `NjStatusNotAnswered` and leave `out_value` untouched.
///
/// # Safety
/// `eval` must be a live handle from [`nj_parse_response`]; `out_value`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nj_evaluation_rating(
    eval: *const NjEvaluation,
    index: size_t,
    out_value: *mut c_double,
) -> NjStatus {
    if eval.is_null() || out_value.is_null() {
        return NjStatus::NjStatusNullArgument;
    }
    if index >= 6 {
        return NjStatus::NjStatusIndexOutOfRange;
    }
    let ratings = (*eval).inner.scores.as_array();
    match ratings[index].score() {
        Some(score) => {
            *out_value = score.as_f64();
            NjStatus::NjStatusOk
        }
        None => NjStatus::NjStatusNotAnswered,
    }
}

/// Stated confidence of a parsed evaluation.
///
/// # Safety
/// `eval` must be a live handle or NULL (NULL reads as Unstated).
#[no_mangle]
pub unsafe extern "C" fn nj_evaluation_confidence(eval: *const NjEvaluation) -> NjConfidence {
    if eval.is_null() {
        return NjConfidence::NjConfidenceUnstated;
    }
    confidence_out((*eval).inner.confidence)
}

/// Explanation text; empty string when the reply had none. Free with
/// [`nj_string_free`]. NULL on a NULL handle or interior NUL.
///
/// # Safety
/// `eval` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn nj_evaluation_explanation(eval: *const NjEvaluation) -> *mut c_char {
    if eval.is_null() {
        return ptr::null_mut();
    }
    CString::new((*eval).inner.explanation.clone()).map_or(ptr::null_mut(), CString::into_raw)
}

/// Applies the threshold rule to the parsed scores. `fake_threshold` must
/// lie in (0, 9]. An unanswered q6 yields `NjVerdictRejected`.
///
/// # Safety
/// `eval` must be a live handle; `out_verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nj_evaluation_classify(
    eval: *const NjEvaluation,
    fake_threshold: c_double,
    orientation: NjOrientation,
    out_verdict: *mut NjVerdict,
) -> NjStatus {
    if eval.is_null() || out_verdict.is_null() {
        return NjStatus::NjStatusNullArgument;
    }
    if !fake_threshold.is_finite() {
        return NjStatus::NjStatusInvalidArgument;
    }
    let Ok(threshold) = Score::parse_decimal(&format!("{fake_threshold}")) else {
        return NjStatus::NjStatusInvalidArgument;
    };
    let policy = ThresholdPolicy {
        fake_threshold: threshold,
        orientation: match orientation {
            NjOrientation::NjOrientationScaleConsistent => Orientation::ScaleConsistent,
            NjOrientation::NjOrientationPaperLiteral => Orientation::PaperLiteral,
        },
    };
    if policy.validate().is_err() {
        return NjStatus::NjStatusInvalidArgument;
    }
    *out_verdict = match classify(&(*eval).inner.scores, &policy) {
        Verdict::Real => NjVerdict::NjVerdictReal,
        Verdict::Fake => NjVerdict::NjVerdictFake,
        Verdict::Rejected(_) => NjVerdict::NjVerdictRejected,
    };
    NjStatus::NjStatusOk
}

/// Frees a handle from [`nj_parse_response`]. NULL is a no-op.
///
/// # Safety
/// `eval` must be a handle previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn nj_evaluation_free(eval: *mut NjEvaluation) {
    if !eval.is_null() {
        drop(Box::from_raw(eval));
    }
}

/// Confidence extraction over arbitrary reply text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string (NULL reads as Unstated).
#[no_mangle]
pub unsafe extern "C" fn nj_extract_confidence(text: *const c_char) -> NjConfidence {
    if text.is_null() {
        return NjConfidence::NjConfidenceUnstated;
    }
    match CStr::from_ptr(text).to_str() {
        Ok(text) => confidence_out(extract_confidence(text)),
        Err(_) => NjConfidence::NjConfidenceUnstated,
    }
}

/// Computes the headline rates from confusion counts. Real news is the
/// positive class; rejected items stay in the accuracy and rejection-rate
/// denominators only. Undefined rates come back as NaN.
///
/// # Safety
/// `out_metrics` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nj_metrics_compute(
    tp: u64,
    tn: u64,
    fp: u64,
    fn_: u64,
    rejected: u64,
    out_metrics: *mut NjMetrics,
) -> NjStatus {
    if out_metrics.is_null() {
        return NjStatus::NjStatusNullArgument;
    }
    let summary = compute_metrics("", ConfusionCounts::new(tp, tn, fp, fn_, rejected));
    let rate = |r: Option<newsjudge::metrics::Rate>| r.map_or(f64::NAN, |r| r.as_f64());
    *out_metrics = NjMetrics {
        total: summary.counts.total,
        recall: rate(summary.recall),
        specificity: rate(summary.specificity),
        precision: rate(summary.precision),
        f1: rate(summary.f1),
        accuracy: rate(summary.accuracy),
        rejection_rate: rate(summary.rejection_rate),
    };
    NjStatus::NjStatusOk
}

/// Variability over a row-major verdict grid (`reps` rows of `items` cells,
/// cell values are `NjVerdict` as i32). All rejections compare equal. Writes
/// the disagreement rate to `out_rate` and, when `out_indicators` is not
/// NULL, one 0/1 flag per item.
///
/// # Safety
/// `verdicts` must point to `reps * items` readable i32 values;
/// `out_indicators`, when non-NULL, to `items` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nj_variability_rate(
    verdicts: *const i32,
    reps: size_t,
    items: size_t,
    out_rate: *mut c_double,
    out_indicators: *mut u8,
) -> NjStatus {
    if verdicts.is_null() || out_rate.is_null() {
        return NjStatus::NjStatusNullArgument;
    }
    if reps < 2 || items == 0 {
        return NjStatus::NjStatusInvalidArgument;
    }
    let Some(cell_count) = reps.checked_mul(items) else {
        return NjStatus::NjStatusInvalidArgument;
    };
    let cells = std::slice::from_raw_parts(verdicts, cell_count);
    let decode = |v: i32| -> Option<Verdict> {
        match v {
            0 => Some(Verdict::Real),
            1 => Some(Verdict::Fake),
            2 => Some(Verdict::Rejected(RejectReason::NoParse)),
            _ => None,
        }
    };
    let mut disagreeing = 0u64;
    for item in 0..items {
        let mut column = Vec::with_capacity(reps);
        for rep in 0..reps {
            let Some(verdict) = decode(cells[rep * items + item]) else {
                return NjStatus::NjStatusInvalidArgument;
            };
            column.push(verdict);
        }
        let indicator = newsjudge::variability::item_variability(
            &column,
            newsjudge::variability::ComparisonMode::CollapseRejected,
        )
        .expect("reps >= 2 checked above");
        disagreeing += u64::from(indicator);
        if !out_indicators.is_null() {
            *out_indicators.add(item) = indicator;
        }
    }
    *out_rate = disagreeing as f64 / items as f64;
    NjStatus::NjStatusOk
}

/// Frees a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
