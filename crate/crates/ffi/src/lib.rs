//! C ABI over the styloverify verifier.
//!
//! Stores and vocabularies cross the boundary as opaque handles created by
//! `sv_*_load` and released with the matching `sv_*_free`. Every function
//! returns an [`SvStatus`]; on failure `sv_last_error()` holds a message for
//! the calling thread. Panics are caught and reported as `SV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use styloverify::corpus::Label;
use styloverify::detection::{perplexity, TokenLogProbs};
use styloverify::evaluation::{roc_auc, McNemarResult};
use styloverify::features::{Featurizer, NGramVocabulary};
use styloverify::verifier::{load_store, DistanceDistribution, Verdict};
use styloverify::{Error, ErrorCategory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidData = 4,
    CorruptStore = 5,
    VersionMismatch = 6,
    Io = 7,
    Panic = 8,
}

/// A loaded distance store.
pub struct SvStore(DistanceDistribution);

/// A loaded n-gram vocabulary.
pub struct SvVocab(NGramVocabulary);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvVerdict {
    pub same_author: bool,
    pub s_prob: f64,
    pub d_prob: f64,
    pub confidence: f64,
    pub distance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvMcNemar {
    pub chi2: f64,
    pub significant_at_05: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> SvStatus {
    match err {
        Error::CorruptStore(_) => SvStatus::CorruptStore,
        Error::VersionMismatch { .. } => SvStatus::VersionMismatch,
        Error::Io { .. } => SvStatus::Io,
        _ => match err.category() {
            ErrorCategory::Config => SvStatus::InvalidConfig,
            _ => SvStatus::InvalidData,
        },
    }
}

struct Failure(SvStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SvStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {message}"));
            SvStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SvStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SvStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

impl From<Verdict> for SvVerdict {
    fn from(v: Verdict) -> Self {
        SvVerdict {
            same_author: v.predicted == Label::SameAuthor,
            s_prob: v.s_prob,
            d_prob: v.d_prob,
            confidence: v.confidence,
            distance: v.distance,
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sv_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a store file. The checksum and version are verified.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sv_store_load(path: *const c_char, out: *mut *mut SvStore) -> SvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let store = load_store(&path)?;
        *out = Box::into_raw(Box::new(SvStore(store)));
        Ok(())
    })
}

/// Parses a store from an in-memory buffer.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sv_store_from_bytes(data: *const u8, len: usize, out: *mut *mut SvStore) -> SvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let bytes = slice_arg(data, len, "data")?;
        let store = DistanceDistribution::from_bytes(bytes)?;
        *out = Box::into_raw(Box::new(SvStore(store)));
        Ok(())
    })
}

/// Releases a store. NULL is ignored.
///
/// # Safety
/// `store` must come from `sv_store_load`/`sv_store_from_bytes` and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sv_store_free(store: *mut SvStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Sizes of the same-author and different-author lists.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sv_store_counts(store: *const SvStore, n_same: *mut usize, n_diff: *mut usize) -> SvStatus {
    guard(|| {
        let store = store.as_ref().ok_or_else(|| null("store"))?;
        *out_arg(n_same, "n_same")? = store.0.n_same();
        *out_arg(n_diff, "n_diff")? = store.0.n_diff();
        Ok(())
    })
}

/// Scores an already computed distance against the store.
///
/// # Safety
/// `store` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sv_classify_distance(store: *const SvStore, distance: f64, out: *mut SvVerdict) -> SvStatus {
    guard(|| {
        let store = store.as_ref().ok_or_else(|| null("store"))?;
        let out = out_arg(out, "out")?;
        *out = store.0.verdict(distance)?.into();
        Ok(())
    })
}

/// Loads a vocabulary file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sv_vocab_load(path: *const c_char, out: *mut *mut SvVocab) -> SvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let vocab = NGramVocabulary::load(&path)?;
        *out = Box::into_raw(Box::new(SvVocab(vocab)));
        Ok(())
    })
}

/// Releases a vocabulary. NULL is ignored.
///
/// # Safety
/// `vocab` must come from `sv_vocab_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sv_vocab_free(vocab: *mut SvVocab) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// Classifies two raw texts with TF-IDF features. The store must have been
/// built without the embedding block (alpha 0).
///
/// # Safety
/// Handles and `out` must be valid; `a` and `b` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sv_verify_texts(
    store: *const SvStore,
    vocab: *const SvVocab,
    a: *const c_char,
    b: *const c_char,
    out: *mut SvVerdict,
) -> SvStatus {
    guard(|| {
        let store = store.as_ref().ok_or_else(|| null("store"))?;
        let vocab = vocab.as_ref().ok_or_else(|| null("vocab"))?;
        let out = out_arg(out, "out")?;
        let (a, b) = (str_arg(a, "a")?, str_arg(b, "b")?);
        let alpha = store.0.meta().alpha;
        if alpha != 0.0 {
            return Err(Failure(
                SvStatus::InvalidConfig,
                format!("store was built with alpha = {alpha}; text verification needs an alpha 0 store"),
            ));
        }
        let featurizer = Featurizer::tfidf_only(vocab.0.clone());
        let va = featurizer.vectorize("a", a)?;
        let vb = featurizer.vectorize("b", b)?;
        *out = store.0.classify(&va, &vb)?.into();
        Ok(())
    })
}

/// `exp(−mean(logprobs))` over natural-log token probabilities.
///
/// # Safety
/// `logprobs` must point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sv_perplexity(logprobs: *const f64, len: usize, out: *mut f64) -> SvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let tlp = TokenLogProbs {
            id: "input".into(),
            scorer_tag: String::new(),
            logprobs: slice_arg(logprobs, len, "logprobs")?.to_vec(),
        };
        *out = perplexity(&tlp)?;
        Ok(())
    })
}

/// Mann–Whitney ROC AUC of positive against negative scores.
///
/// # Safety
/// Arrays must hold the stated number of doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sv_roc_auc(
    pos: *const f64,
    n_pos: usize,
    neg: *const f64,
    n_neg: usize,
    out: *mut f64,
) -> SvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = roc_auc(slice_arg(pos, n_pos, "pos")?, slice_arg(neg, n_neg, "neg")?)?;
        Ok(())
    })
}

/// McNemar's statistic from the discordant counts.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sv_mcnemar(n01: u64, n10: u64, out: *mut SvMcNemar) -> SvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = McNemarResult::from_counts(n01, n10);
        *out = SvMcNemar {
            chi2: r.chi2,
            significant_at_05: r.significant_at_05,
        };
        Ok(())
    })
}
