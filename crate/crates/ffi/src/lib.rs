//! C interface to `spectral_bridges`.
//!
//! Models live behind an opaque `SbModel` handle. Every fallible call
//! returns an `SbStatus`; on failure the message is kept per thread and can
//! be read with `sb_last_error_message`. Point matrices are row-major
//! `rows x cols` arrays of `double`; labels are `size_t`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use spectral_bridges::{ClusterModel, DataMatrix, Error, ErrorClass, SBConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Inconsistent parameters.
    Config = 2,
    /// Malformed or mis-shaped input data.
    Data = 3,
    /// A numerical stage failed.
    Numeric = 4,
    /// Output buffer length does not match.
    BufferSize = 5,
    /// A string argument was not valid UTF-8.
    Utf8 = 6,
    /// The library panicked; this is a bug.
    Internal = 7,
}

/// Fit parameters. Obtain defaults with `sb_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SbConfig {
    pub n_clusters: usize,
    pub n_regions: usize,
    pub m_factor: f64,
    pub seed: u64,
    pub kmeans_restarts: usize,
    pub lloyd_max_iter: usize,
    pub lloyd_tol: f64,
}

impl From<SbConfig> for SBConfig {
    fn from(c: SbConfig) -> Self {
        SBConfig {
            n_clusters: c.n_clusters,
            n_regions: c.n_regions,
            m_factor: c.m_factor,
            seed: c.seed,
            kmeans_restarts: c.kmeans_restarts,
            lloyd_max_iter: c.lloyd_max_iter,
            lloyd_tol: c.lloyd_tol,
        }
    }
}

impl From<SBConfig> for SbConfig {
    fn from(c: SBConfig) -> Self {
        SbConfig {
            n_clusters: c.n_clusters,
            n_regions: c.n_regions,
            m_factor: c.m_factor,
            seed: c.seed,
            kmeans_restarts: c.kmeans_restarts,
            lloyd_max_iter: c.lloyd_max_iter,
            lloyd_tol: c.lloyd_tol,
        }
    }
}

/// Opaque fitted model.
pub struct SbModel {
    inner: ClusterModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SbStatus, msg: impl Into<String>) -> SbStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SbStatus {
    let status = match e.class() {
        ErrorClass::Config => SbStatus::Config,
        ErrorClass::Data => SbStatus::Data,
        ErrorClass::Numeric => SbStatus::Numeric,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SbStatus>) -> SbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SbStatus::Internal, "internal panic"),
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), SbStatus> {
    if p.is_null() {
        Err(fail(SbStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn matrix(data: *const f64, rows: usize, cols: usize) -> Result<DataMatrix, SbStatus> {
    non_null(data, "data")?;
    let len = rows.checked_mul(cols).ok_or_else(|| fail(SbStatus::Data, "rows * cols overflows"))?;
    let values = slice::from_raw_parts(data, len).to_vec();
    DataMatrix::new(rows, cols, values).map_err(from_error)
}

unsafe fn model_ref<'a>(model: *const SbModel) -> Result<&'a SbModel, SbStatus> {
    non_null(model, "model")?;
    Ok(&*model)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default parameters for `n_clusters` clusters over `n_regions` regions.
#[no_mangle]
pub extern "C" fn sb_config_default(n_clusters: usize, n_regions: usize) -> SbConfig {
    SBConfig::new(n_clusters, n_regions).into()
}

/// Fits a model to `rows x cols` points. On success `*out` owns a new model
/// that must be released with `sb_model_free`.
///
/// # Safety
/// `data` must point to `rows * cols` doubles, `config` to a valid
/// `SbConfig` and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_fit(
    data: *const f64,
    rows: usize,
    cols: usize,
    config: *const SbConfig,
    out: *mut *mut SbModel,
) -> SbStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let x = matrix(data, rows, cols)?;
        let cfg: SBConfig = (*config).into();
        let inner = spectral_bridges::fit(&x, &cfg).map_err(from_error)?;
        *out = Box::into_raw(Box::new(SbModel { inner }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_model_free(model: *mut SbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of regions `m` of the model.
///
/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sb_model_n_regions(model: *const SbModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.centroids().rows())
}

/// Number of training points with stored labels; 0 for a model loaded from
/// JSON.
///
/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sb_model_n_points(model: *const SbModel) -> usize {
    model.as_ref().and_then(|m| m.inner.point_labels()).map_or(0, <[usize]>::len)
}

/// Copies the training labels into `out`, which must hold exactly
/// `sb_model_n_points(model)` entries.
///
/// # Safety
/// `model` must be a live handle and `out` must point to `len` writable
/// `size_t`.
#[no_mangle]
pub unsafe extern "C" fn sb_model_labels(model: *const SbModel, out: *mut usize, len: usize) -> SbStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        let labels =
            m.inner.point_labels().ok_or_else(|| fail(SbStatus::Config, "model carries no training labels"))?;
        if labels.len() != len {
            return Err(fail(SbStatus::BufferSize, format!("buffer holds {len} labels, model has {}", labels.len())));
        }
        slice::from_raw_parts_mut(out, len).copy_from_slice(labels);
        Ok(())
    })
}

/// Labels `rows` new points of dimension `cols` into `out` (`rows` entries).
///
/// # Safety
/// `model` must be a live handle, `data` must point to `rows * cols`
/// doubles and `out` to `rows` writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn sb_model_predict(
    model: *const SbModel,
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut usize,
) -> SbStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        let x = matrix(data, rows, cols)?;
        let labels = m.inner.predict(&x).map_err(from_error)?;
        slice::from_raw_parts_mut(out, rows).copy_from_slice(&labels);
        Ok(())
    })
}

/// Serializes the model. `*out` receives a string to release with
/// `sb_string_free`.
///
/// # Safety
/// `model` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_model_to_json(model: *const SbModel, out: *mut *mut c_char) -> SbStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        let json = m.inner.to_json().map_err(from_error)?;
        *out = CString::new(json).expect("JSON has no nul").into_raw();
        Ok(())
    })
}

/// Loads a model from its JSON form. The result has no training labels.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_model_from_json(json: *const c_char, out: *mut *mut SbModel) -> SbStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| fail(SbStatus::Utf8, e.to_string()))?;
        let inner = ClusterModel::from_json(text).map_err(from_error)?;
        *out = Box::into_raw(Box::new(SbModel { inner }));
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Adjusted Rand index of two labelings of length `n`.
///
/// # Safety
/// `a` and `b` must point to `n` `size_t`, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn sb_ari(a: *const usize, b: *const usize, n: usize, out: *mut f64) -> SbStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        let (a, b) = (slice::from_raw_parts(a, n), slice::from_raw_parts(b, n));
        *out = spectral_bridges::ari(a, b).map_err(from_error)?;
        Ok(())
    })
}

/// Normalized mutual information of two labelings of length `n`.
///
/// # Safety
/// `a` and `b` must point to `n` `size_t`, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn sb_nmi(a: *const usize, b: *const usize, n: usize, out: *mut f64) -> SbStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        let (a, b) = (slice::from_raw_parts(a, n), slice::from_raw_parts(b, n));
        *out = spectral_bridges::nmi(a, b).map_err(from_error)?;
        Ok(())
    })
}
