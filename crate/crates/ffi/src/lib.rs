//! C ABI over the `redcomets` classifier.
//!
//! Datasets are opaque handles created by one of the `rc_dataset_*`
//! constructors and released with [`rc_dataset_free`]. Every fallible call
//! returns an [`RcStatus`]; on failure, [`rc_last_error_message`] describes
//! the most recent error on the calling thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use redcomets::bench::{parse_ts, read_ts_file, run_benchmark, wilcoxon_signed_rank};
use redcomets::data::align_encodings;
use redcomets::forest::ForestConfig;
use redcomets::multivariate::run_variant;
use redcomets::{Dataset, Error, LabelEncoding, LensSelectionConfig, PipelineConfig};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    InvalidLens = 4,
    DegenerateTraining = 5,
    Parse = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Pipeline settings. Start from [`rc_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcConfig {
    /// Lenses per representation as a proportion of the series length.
    pub p: f64,
    pub alpha_min: usize,
    pub alpha_max: usize,
    pub trees: usize,
    pub folds: usize,
    pub seed: u64,
    /// Worker threads, 0 for all cores.
    pub threads: usize,
}

/// Opaque dataset handle.
pub struct RcDataset {
    inner: Dataset,
}

struct Failure {
    status: RcStatus,
    message: String,
}

impl Failure {
    fn new(status: RcStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

fn status_of(e: &Error) -> RcStatus {
    match e {
        Error::InvalidInput(_) => RcStatus::InvalidInput,
        Error::InvalidLens(_) => RcStatus::InvalidLens,
        Error::DegenerateTraining(_) => RcStatus::DegenerateTraining,
        Error::Parse { .. } => RcStatus::Parse,
        Error::Io(_) => RcStatus::Io,
        Error::Resample { source, .. } => status_of(source),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(status_of(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RcStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(panic) => {
            let detail = panic
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| panic.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            set_last_error(&format!("internal panic: {detail}"));
            RcStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(RcStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn dataset<'a>(p: *const RcDataset, what: &str) -> Result<&'a Dataset, Failure> {
    non_null(p, what)?;
    Ok(&(*p).inner)
}

unsafe fn emit_dataset(out: *mut *mut RcDataset, ds: Dataset) {
    *out = Box::into_raw(Box::new(RcDataset { inner: ds }));
}

impl RcConfig {
    fn pipeline(&self) -> Result<PipelineConfig, Failure> {
        let lenses = LensSelectionConfig {
            p: self.p,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            ..LensSelectionConfig::default()
        };
        lenses.validate()?;
        if self.trees == 0 {
            return Err(Failure::new(RcStatus::InvalidInput, "trees must be at least 1"));
        }
        if self.folds < 2 {
            return Err(Failure::new(RcStatus::InvalidInput, "folds must be at least 2"));
        }
        Ok(PipelineConfig {
            lenses,
            forest: ForestConfig {
                trees: self.trees,
                bootstrap: true,
            },
            folds: self.folds,
            seed: self.seed,
        })
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> Result<T, Error> + Send) -> Result<T, Failure> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Failure::new(RcStatus::InvalidInput, format!("cannot start thread pool: {e}")))?;
        Ok(pool.install(f)?)
    }
}

/// Library defaults: p 0.05, alphabet 3..=10, 100 trees, 5 folds, seed 0,
/// all cores.
#[no_mangle]
pub extern "C" fn rc_config_default() -> RcConfig {
    let d = PipelineConfig::default();
    RcConfig {
        p: d.lenses.p,
        alpha_min: d.lenses.alpha_min,
        alpha_max: d.lenses.alpha_max,
        trees: d.forest.trees,
        folds: d.folds,
        seed: d.seed,
        threads: 0,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL when the last call
/// succeeded. Valid until the next `rc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Reads a `.ts` archive file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_dataset_from_ts_file(path: *const c_char, out: *mut *mut RcDataset) -> RcStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = c_str(path, "path")?;
        emit_dataset(out, read_ts_file(path)?);
        Ok(())
    })
}

/// Parses `.ts` text; `name` is used when the text has no `@problemName`.
///
/// # Safety
/// `text` and `name` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_dataset_from_ts_text(
    text: *const c_char,
    name: *const c_char,
    out: *mut *mut RcDataset,
) -> RcStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = c_str(text, "text")?;
        let name = c_str(name, "name")?;
        emit_dataset(out, parse_ts(text, name)?);
        Ok(())
    })
}

/// Builds a dataset from `instances * dims * length` values laid out
/// instance-major, then dimension, then time. `labels[i] < class_count`;
/// class `c` is named by its decimal index, zero-padded so that name order
/// matches index order.
///
/// # Safety
/// `values` must point to `instances * dims * length` doubles, `labels` to
/// `instances` entries and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_dataset_from_arrays(
    values: *const f64,
    instances: usize,
    dims: usize,
    length: usize,
    labels: *const usize,
    class_count: usize,
    out: *mut *mut RcDataset,
) -> RcStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(values, "values")?;
        non_null(labels, "labels")?;
        let total = instances
            .checked_mul(dims)
            .and_then(|v| v.checked_mul(length))
            .ok_or_else(|| Failure::new(RcStatus::InvalidInput, "dataset size overflows"))?;
        if total == 0 || class_count == 0 {
            return Err(Failure::new(RcStatus::InvalidInput, "empty dataset or no classes"));
        }
        let values = slice::from_raw_parts(values, total);
        let labels = slice::from_raw_parts(labels, instances).to_vec();
        if let Some(bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Failure::new(
                RcStatus::InvalidInput,
                format!("label {bad} out of range for {class_count} classes"),
            ));
        }
        let width = (class_count - 1).to_string().len();
        let encoding = LabelEncoding::from_classes((0..class_count).map(|c| format!("{c:0width$}")))?;
        let rows = values
            .chunks_exact(dims * length)
            .map(|inst| inst.chunks_exact(length).map(<[f64]>::to_vec).collect())
            .collect();
        emit_dataset(out, Dataset::new("arrays", rows, labels, encoding)?);
        Ok(())
    })
}

/// Releases a dataset. NULL is ignored.
///
/// # Safety
/// `ds` must come from an `rc_dataset_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn rc_dataset_free(ds: *mut RcDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Instance count, dimensions, series length and class count. Any output
/// pointer may be NULL.
///
/// # Safety
/// `ds` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_dataset_shape(
    ds: *const RcDataset,
    instances: *mut usize,
    dims: *mut usize,
    length: *mut usize,
    classes: *mut usize,
) -> RcStatus {
    guard(|| {
        let ds = dataset(ds, "dataset")?;
        for (p, v) in [
            (instances, ds.len()),
            (dims, ds.dims()),
            (length, ds.series_length()),
            (classes, ds.class_count()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Writes class `index`'s name, NUL-terminated, into `buf`. With a NULL or
/// short buffer the call fails with `BufferTooSmall` and `needed` (if
/// non-NULL) receives the required size including the terminator.
///
/// # Safety
/// `ds` must be a live handle; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rc_dataset_class_name(
    ds: *const RcDataset,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> RcStatus {
    guard(|| {
        let ds = dataset(ds, "dataset")?;
        let name = ds
            .encoding()
            .decode(index)
            .ok_or_else(|| Failure::new(RcStatus::InvalidInput, format!("class index {index} out of range")))?;
        let size = name.len() + 1;
        if !needed.is_null() {
            *needed = size;
        }
        if buf.is_null() || len < size {
            return Err(Failure::new(
                RcStatus::BufferTooSmall,
                format!("class name needs {size} bytes"),
            ));
        }
        ptr::copy_nonoverlapping(name.as_ptr(), buf.cast::<u8>(), name.len());
        *buf.add(name.len()) = 0;
        Ok(())
    })
}

/// Fits `variant` (1..=9) on `train` and labels `test`. `labels_out` receives
/// `test`'s instance count of class indices over the sorted union of both
/// datasets' class names, which is `train`'s own indexing whenever `test`
/// adds no new classes. `accuracy_out` may be NULL.
///
/// # Safety
/// Handles must be live, `config` valid, `labels_out` must hold `labels_len`
/// entries.
#[no_mangle]
pub unsafe extern "C" fn rc_classify(
    train: *const RcDataset,
    test: *const RcDataset,
    variant: u8,
    config: *const RcConfig,
    labels_out: *mut usize,
    labels_len: usize,
    accuracy_out: *mut f64,
) -> RcStatus {
    guard(|| {
        let (train, test) = (dataset(train, "train")?, dataset(test, "test")?);
        non_null(config, "config")?;
        non_null(labels_out, "labels_out")?;
        if labels_len < test.len() {
            return Err(Failure::new(
                RcStatus::BufferTooSmall,
                format!("labels_out holds {labels_len}, test has {} instances", test.len()),
            ));
        }
        let config = &*config;
        let pipeline = config.pipeline()?;
        let (train, test) = align_encodings(train, test)?;
        let report = config.install(|| run_variant(variant, &train, &test, &pipeline))?;
        slice::from_raw_parts_mut(labels_out, test.len()).copy_from_slice(&report.labels);
        if !accuracy_out.is_null() {
            let correct = report.labels.iter().zip(test.labels()).filter(|(p, a)| p == a).count();
            *accuracy_out = correct as f64 / test.len() as f64;
        }
        Ok(())
    })
}

/// Evaluates `variant` on `resamples` seeded stratified resamples of the
/// pooled data. `accuracies_out` receives one accuracy per resample;
/// `mean_out` may be NULL.
///
/// # Safety
/// Handles must be live, `config` valid, `accuracies_out` must hold
/// `accuracies_len` entries.
#[no_mangle]
pub unsafe extern "C" fn rc_benchmark(
    train: *const RcDataset,
    test: *const RcDataset,
    variant: u8,
    resamples: usize,
    config: *const RcConfig,
    accuracies_out: *mut f64,
    accuracies_len: usize,
    mean_out: *mut f64,
) -> RcStatus {
    guard(|| {
        let (train, test) = (dataset(train, "train")?, dataset(test, "test")?);
        non_null(config, "config")?;
        non_null(accuracies_out, "accuracies_out")?;
        if accuracies_len < resamples {
            return Err(Failure::new(
                RcStatus::BufferTooSmall,
                format!("accuracies_out holds {accuracies_len}, {resamples} resamples requested"),
            ));
        }
        let config = &*config;
        let pipeline = config.pipeline()?;
        let (train, test) = align_encodings(train, test)?;
        let result = config.install(|| run_benchmark(&train, &test, variant, resamples, &pipeline))?;
        slice::from_raw_parts_mut(accuracies_out, resamples).copy_from_slice(&result.accuracies);
        if !mean_out.is_null() {
            *mean_out = result.mean_accuracy;
        }
        Ok(())
    })
}

/// Two-sided Wilcoxon signed-rank p-value of the paired samples `a` and `b`.
///
/// # Safety
/// `a` and `b` must each hold `n` doubles; `p_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_wilcoxon(a: *const f64, b: *const f64, n: usize, p_out: *mut f64) -> RcStatus {
    guard(|| {
        non_null(p_out, "p_out")?;
        if n == 0 {
            return Err(Failure::new(RcStatus::InvalidInput, "need at least one pair"));
        }
        non_null(a, "a")?;
        non_null(b, "b")?;
        *p_out = wilcoxon_signed_rank(slice::from_raw_parts(a, n), slice::from_raw_parts(b, n))?;
        Ok(())
    })
}
