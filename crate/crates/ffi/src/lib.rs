//! C ABI over the rtt-qe toolkit. Scalar results come back through out
//! pointers, every call returns a status code, and failure details are kept
//! in a thread-local message retrievable with `rttqe_last_error_message`.
//!
//! Ownership rules: strings returned by the library are either static
//! (`rttqe_version`, `rttqe_last_error_message`, metric names) or must be
//! released with the matching `*_free` function. Handles are opaque and
//! single-owner.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::LazyLock;

use rtt_qe::analysis::{error_stats, kendall_tau, pearson_r};
use rtt_qe::dataset::{enumerate_pairs, LanguageSpec, ResourceClass, Usage};
use rtt_qe::predictor::{load_model, predict, LinearPredictor, PredictorError};
use rtt_qe::textmetrics::{score_corpus, tokenize_13a, Aggregation, MetricId, Smoothing};

/// Call succeeded.
pub const RTTQE_OK: c_int = 0;
/// A pointer was null or an argument was out of range.
pub const RTTQE_ERR_ARG: c_int = 1;
/// A string argument was not valid UTF-8.
pub const RTTQE_ERR_UTF8: c_int = 2;
/// A file could not be read.
pub const RTTQE_ERR_IO: c_int = 3;
/// The inputs were structurally valid but the computation rejected them.
pub const RTTQE_ERR_COMPUTE: c_int = 4;
/// An internal invariant failed; the library state is still consistent.
pub const RTTQE_ERR_PANIC: c_int = 5;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

static VERSION: LazyLock<CString> =
    LazyLock::new(|| CString::new(rtt_qe::TOOL_VERSION).expect("version has no NUL"));

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            RTTQE_ERR_PANIC
        }
    }
}

/// Collect a C string array into owned Rust strings, or a status code.
unsafe fn read_str_array(
    ptr: *const *const c_char,
    len: usize,
    what: &str,
) -> Result<Vec<String>, c_int> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(RTTQE_ERR_ARG);
    }
    let slice = std::slice::from_raw_parts(ptr, len);
    let mut out = Vec::with_capacity(len);
    for (i, &p) in slice.iter().enumerate() {
        if p.is_null() {
            set_error(format!("{what}[{i}] is null"));
            return Err(RTTQE_ERR_ARG);
        }
        match CStr::from_ptr(p).to_str() {
            Ok(s) => out.push(s.to_string()),
            Err(_) => {
                set_error(format!("{what}[{i}] is not valid UTF-8"));
                return Err(RTTQE_ERR_UTF8);
            }
        }
    }
    Ok(out)
}

unsafe fn read_f64_array(ptr: *const f64, len: usize, what: &str) -> Result<Vec<f64>, c_int> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(RTTQE_ERR_ARG);
    }
    Ok(std::slice::from_raw_parts(ptr, len).to_vec())
}

unsafe fn read_c_str(ptr: *const c_char, what: &str) -> Result<String, c_int> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(RTTQE_ERR_ARG);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s.to_string()),
        Err(_) => {
            set_error(format!("{what} is not valid UTF-8"));
            Err(RTTQE_ERR_UTF8)
        }
    }
}

fn require_out<T>(ptr: *mut T, what: &str) -> Result<(), c_int> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(RTTQE_ERR_ARG);
    }
    Ok(())
}

/// Toolkit version as a static NUL-terminated string. Never null; do not
/// free.
#[no_mangle]
pub extern "C" fn rttqe_version() -> *const c_char {
    VERSION.as_ptr()
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded. The pointer stays valid until the next toolkit call on
/// the same thread; do not free.
#[no_mangle]
pub extern "C" fn rttqe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(c) => c.as_ptr(),
        None => std::ptr::null(),
    })
}

fn corpus_score(metric: &MetricId, hyps: &[String], refs: &[String], out: *mut f64) -> c_int {
    match score_corpus(metric, None, hyps, refs) {
        Ok(result) => {
            unsafe { *out = result.score };
            RTTQE_OK
        }
        Err(e) => {
            set_error(e.to_string());
            RTTQE_ERR_COMPUTE
        }
    }
}

/// Corpus BLEU over word 1..4-grams with standard international
/// tokenization, on a 0..100 scale.
///
/// `smoothing` is one of "none", "floor", "floor(F)", "add-k", "add-k(K)",
/// or null for "none". When `sentence_average` is true the score is the
/// mean of per-segment scores instead of the corpus-level aggregate.
///
/// # Safety
/// `hyps` and `refs` must point to `len` valid NUL-terminated strings each,
/// and `out_score` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rttqe_bleu_corpus(
    hyps: *const *const c_char,
    refs: *const *const c_char,
    len: usize,
    smoothing: *const c_char,
    sentence_average: bool,
    out_score: *mut f64,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_score, "out_score") {
            return code;
        }
        let hyps = match read_str_array(hyps, len, "hyps") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let refs = match read_str_array(refs, len, "refs") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let smoothing = if smoothing.is_null() {
            Smoothing::None
        } else {
            let text = match read_c_str(smoothing, "smoothing") {
                Ok(s) => s,
                Err(code) => return code,
            };
            match text.parse::<Smoothing>() {
                Ok(s) => s,
                Err(e) => {
                    set_error(e.to_string());
                    return RTTQE_ERR_ARG;
                }
            }
        };
        let aggregation = if sentence_average {
            Aggregation::SentenceAverage
        } else {
            Aggregation::CorpusLevel
        };
        let metric = MetricId::bleu_13a()
            .with_smoothing(smoothing)
            .with_aggregation(aggregation);
        corpus_score(&metric, &hyps, &refs, out_score)
    })
}

/// Corpus chrF over character 1..6-grams, on a 0..100 scale. `beta` weights
/// recall against precision; pass a non-positive value for the default 2.
///
/// # Safety
/// `hyps` and `refs` must point to `len` valid NUL-terminated strings each,
/// and `out_score` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rttqe_chrf_corpus(
    hyps: *const *const c_char,
    refs: *const *const c_char,
    len: usize,
    beta: f64,
    sentence_average: bool,
    out_score: *mut f64,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_score, "out_score") {
            return code;
        }
        if beta.is_nan() {
            set_error("beta is NaN");
            return RTTQE_ERR_ARG;
        }
        let hyps = match read_str_array(hyps, len, "hyps") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let refs = match read_str_array(refs, len, "refs") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let aggregation = if sentence_average {
            Aggregation::SentenceAverage
        } else {
            Aggregation::CorpusLevel
        };
        let mut metric = MetricId::chrf().with_aggregation(aggregation);
        if beta > 0.0 {
            metric = metric.with_beta(beta);
        }
        corpus_score(&metric, &hyps, &refs, out_score)
    })
}

/// Tokenize with the standard international scheme (Unicode NFC, then
/// punctuation and symbol splitting). On success `*out_tokens` receives an
/// array of `*out_len` NUL-terminated strings; release it with
/// `rttqe_string_array_free`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out_tokens` and `out_len`
/// must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn rttqe_tokenize_13a(
    text: *const c_char,
    out_tokens: *mut *mut *mut c_char,
    out_len: *mut usize,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_tokens, "out_tokens") {
            return code;
        }
        if let Err(code) = require_out(out_len, "out_len") {
            return code;
        }
        *out_tokens = std::ptr::null_mut();
        *out_len = 0;
        let text = match read_c_str(text, "text") {
            Ok(s) => s,
            Err(code) => return code,
        };
        let tokens = tokenize_13a(&text);
        let ptrs: Vec<*mut c_char> = tokens
            .into_iter()
            .map(|t| {
                // Tokens come from a NUL-free input, so this cannot fail.
                CString::new(t).expect("token has no NUL").into_raw()
            })
            .collect();
        let len = ptrs.len();
        let array = Box::into_raw(ptrs.into_boxed_slice());
        *out_tokens = array as *mut *mut c_char;
        *out_len = len;
        RTTQE_OK
    })
}

/// Release an array produced by `rttqe_tokenize_13a`. Null is ignored; `len`
/// must be the value the producing call wrote.
///
/// # Safety
/// `tokens` must be null or an array previously returned by this library,
/// released at most once.
#[no_mangle]
pub unsafe extern "C" fn rttqe_string_array_free(tokens: *mut *mut c_char, len: usize) {
    if tokens.is_null() {
        return;
    }
    let slice = std::ptr::slice_from_raw_parts_mut(tokens, len);
    let boxed = Box::from_raw(slice);
    for &p in boxed.iter() {
        if !p.is_null() {
            drop(CString::from_raw(p));
        }
    }
}

/// Pearson correlation coefficient of two aligned samples.
///
/// # Safety
/// `x` and `y` must point to `len` doubles each; `out_r` must be a valid
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rttqe_pearson_r(
    x: *const f64,
    y: *const f64,
    len: usize,
    out_r: *mut f64,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_r, "out_r") {
            return code;
        }
        let x = match read_f64_array(x, len, "x") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let y = match read_f64_array(y, len, "y") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match pearson_r(&x, &y) {
            Ok(r) => {
                *out_r = r;
                RTTQE_OK
            }
            Err(e) => {
                set_error(e.to_string());
                RTTQE_ERR_COMPUTE
            }
        }
    })
}

/// Kendall rank correlation (tau-b, tie-adjusted) of two aligned samples.
///
/// # Safety
/// `x` and `y` must point to `len` doubles each; `out_tau` must be a valid
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rttqe_kendall_tau(
    x: *const f64,
    y: *const f64,
    len: usize,
    out_tau: *mut f64,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_tau, "out_tau") {
            return code;
        }
        let x = match read_f64_array(x, len, "x") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let y = match read_f64_array(y, len, "y") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match kendall_tau(&x, &y) {
            Ok(tau) => {
                *out_tau = tau;
                RTTQE_OK
            }
            Err(e) => {
                set_error(e.to_string());
                RTTQE_ERR_COMPUTE
            }
        }
    })
}

/// Mean absolute error and root-mean-square error of predictions against
/// true values.
///
/// # Safety
/// `pred` and `truth` must point to `len` doubles each; `out_mae` and
/// `out_rmse` must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn rttqe_error_stats(
    pred: *const f64,
    truth: *const f64,
    len: usize,
    out_mae: *mut f64,
    out_rmse: *mut f64,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_mae, "out_mae") {
            return code;
        }
        if let Err(code) = require_out(out_rmse, "out_rmse") {
            return code;
        }
        let pred = match read_f64_array(pred, len, "pred") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let truth = match read_f64_array(truth, len, "truth") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match error_stats(&pred, &truth) {
            Ok((mae, rmse)) => {
                *out_mae = mae;
                *out_rmse = rmse;
                RTTQE_OK
            }
            Err(e) => {
                set_error(e.to_string());
                RTTQE_ERR_COMPUTE
            }
        }
    })
}

/// Loaded quality predictor. Opaque; create with `rttqe_predictor_load` and
/// release with `rttqe_predictor_free`.
pub struct RttqePredictor {
    inner: LinearPredictor,
}

/// Load a predictor from a model file saved by the toolkit. On success
/// writes a handle to `*out`; the caller owns it.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn rttqe_predictor_load(
    path: *const c_char,
    out: *mut *mut RttqePredictor,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out, "out") {
            return code;
        }
        *out = std::ptr::null_mut();
        let path = match read_c_str(path, "path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match load_model(Path::new(&path)) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(RttqePredictor { inner: model }));
                RTTQE_OK
            }
            Err(e) => {
                let code = match &e {
                    PredictorError::Io { .. } => RTTQE_ERR_IO,
                    _ => RTTQE_ERR_COMPUTE,
                };
                set_error(e.to_string());
                code
            }
        }
    })
}

/// Number of features the predictor expects, or 0 for a null handle.
///
/// # Safety
/// `predictor` must be null or a live handle from `rttqe_predictor_load`.
#[no_mangle]
pub unsafe extern "C" fn rttqe_predictor_feature_count(
    predictor: *const RttqePredictor,
) -> usize {
    if predictor.is_null() {
        return 0;
    }
    (*predictor).inner.spec.len()
}

/// Name of the metric the predictor was trained to estimate, as a static
/// string. Null for a null handle; do not free.
///
/// # Safety
/// `predictor` must be null or a live handle from `rttqe_predictor_load`.
#[no_mangle]
pub unsafe extern "C" fn rttqe_predictor_target_metric(
    predictor: *const RttqePredictor,
) -> *const c_char {
    if predictor.is_null() {
        return std::ptr::null();
    }
    let name = (*predictor).inner.target_metric.name.as_str();
    // Registry names are static NUL-free ASCII; expose them via a
    // per-thread cache so the pointer outlives the call.
    thread_local! {
        static NAME: RefCell<Option<CString>> = const { RefCell::new(None) };
    }
    NAME.with(|slot| {
        let c = CString::new(name).expect("metric name has no NUL");
        let mut borrow = slot.borrow_mut();
        *borrow = Some(c);
        borrow.as_ref().unwrap().as_ptr()
    })
}

/// Estimate the target metric from a feature vector. The vector length must
/// equal `rttqe_predictor_feature_count`; when `clamp` is true the estimate
/// is limited to the 0..100 score scale.
///
/// # Safety
/// `predictor` must be a live handle, `features` must point to `len`
/// doubles, and `out_score` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rttqe_predictor_predict(
    predictor: *const RttqePredictor,
    features: *const f64,
    len: usize,
    clamp: bool,
    out_score: *mut f64,
) -> c_int {
    guarded(|| {
        clear_error();
        if let Err(code) = require_out(out_score, "out_score") {
            return code;
        }
        if predictor.is_null() {
            set_error("predictor is null");
            return RTTQE_ERR_ARG;
        }
        let features = match read_f64_array(features, len, "features") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match predict(&(*predictor).inner, &features, clamp) {
            Ok(score) => {
                *out_score = score;
                RTTQE_OK
            }
            Err(e) => {
                set_error(e.to_string());
                RTTQE_ERR_COMPUTE
            }
        }
    })
}

/// Release a predictor handle. Null is ignored.
///
/// # Safety
/// `predictor` must be null or a handle from `rttqe_predictor_load`,
/// released at most once.
#[no_mangle]
pub unsafe extern "C" fn rttqe_predictor_free(predictor: *mut RttqePredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}

/// Partition the directed pairs of a benchmark with `train_test` languages
/// usable for training and `test_only` held-out languages into the three
/// evaluation classes (both sides seen, one side seen, neither side seen).
/// Each count must be at most 2048.
///
/// # Safety
/// The three out pointers must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn rttqe_partition_counts(
    train_test: usize,
    test_only: usize,
    out_type_i: *mut usize,
    out_type_ii: *mut usize,
    out_type_iii: *mut usize,
) -> c_int {
    guarded(|| {
        clear_error();
        for (ptr, what) in [
            (out_type_i, "out_type_i"),
            (out_type_ii, "out_type_ii"),
            (out_type_iii, "out_type_iii"),
        ] {
            if let Err(code) = require_out(ptr, what) {
                return code;
            }
        }
        if train_test > 2048 || test_only > 2048 {
            set_error("language counts above 2048 are not supported");
            return RTTQE_ERR_ARG;
        }
        let mut languages = Vec::with_capacity(train_test + test_only);
        for i in 0..train_test {
            languages.push(LanguageSpec {
                code: format!("t{i}"),
                resource: ResourceClass::High,
                usage: Usage::TrainTest,
            });
        }
        for i in 0..test_only {
            languages.push(LanguageSpec {
                code: format!("e{i}"),
                resource: ResourceClass::Low,
                usage: Usage::TestOnly,
            });
        }
        match enumerate_pairs(&languages) {
            Ok(partition) => {
                let (a, b, c) = partition.counts();
                *out_type_i = a;
                *out_type_ii = b;
                *out_type_iii = c;
                RTTQE_OK
            }
            Err(e) => {
                set_error(e.to_string());
                RTTQE_ERR_ARG
            }
        }
    })
}
