//! C ABI for qgelab.
//!
//! Every function returns a [`QgeStatus`]; on failure the message is kept per
//! thread and can be fetched with [`qge_last_error`]. Complex arrays are
//! interleaved `(re, im)` doubles, matrices row-major. Handles are opaque and
//! released with their `_free` function; strings returned by the library are
//! released with [`qge_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qgelab::ensembles::{self, EnsembleConfig, EnsembleKind, Scaling};
use qgelab::experiments::{self, RunConfig};
use qgelab::laws::ExperimentReport;
use qgelab::linalg::ComplexMatrix;
use qgelab::pfaffian::{self, SkewMatrix, ZZbarPoly};
use qgelab::quat::{extract_quaternionic, QuaternionMatrix};
use qgelab::rng::{stream, trial_rng};
use qgelab::spectra;
use qgelab::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    NotQuaternionic = 4,
    Numerical = 5,
    Degenerate = 6,
    Io = 7,
    Panic = 8,
}

/// A quaternionic matrix.
pub struct QgeMatrix {
    inner: QuaternionMatrix,
}

/// The result of an experiment run.
pub struct QgeReport {
    inner: ExperimentReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(QgeStatus, String);

impl Failure {
    fn new(status: QgeStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

impl From<ensembles::EnsembleError> for Failure {
    fn from(e: ensembles::EnsembleError) -> Self {
        let status = match e {
            ensembles::EnsembleError::InvalidConfig(_) => QgeStatus::InvalidArgument,
            _ => QgeStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

impl From<spectra::SpectraError> for Failure {
    fn from(e: spectra::SpectraError) -> Self {
        let status = match e {
            spectra::SpectraError::DegenerateSpectrum { .. } => QgeStatus::Degenerate,
            spectra::SpectraError::OddLength { .. } => QgeStatus::InvalidArgument,
            spectra::SpectraError::Linalg(_) => QgeStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

impl From<pfaffian::PfaffianError> for Failure {
    fn from(e: pfaffian::PfaffianError) -> Self {
        let status = match e {
            pfaffian::PfaffianError::Overflow { .. } => QgeStatus::Numerical,
            _ => QgeStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<experiments::ExperimentError> for Failure {
    fn from(e: experiments::ExperimentError) -> Self {
        let status = match e {
            experiments::ExperimentError::Io(_) => QgeStatus::Io,
            experiments::ExperimentError::Config(_) | experiments::ExperimentError::Json(_) => {
                QgeStatus::InvalidArgument
            }
            _ => QgeStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QgeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QgeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QgeStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(
            QgeStatus::NullPointer,
            format!("{what} is null"),
        ))
    } else {
        Ok(())
    }
}

unsafe fn write_complex(
    out: *mut f64,
    capacity: usize,
    values: &[Complex64],
) -> Result<(), Failure> {
    if capacity < values.len() {
        return Err(Failure::new(
            QgeStatus::BufferTooSmall,
            format!(
                "need room for {} complex values, got {capacity}",
                values.len()
            ),
        ));
    }
    for (i, z) in values.iter().enumerate() {
        *out.add(2 * i) = z.re;
        *out.add(2 * i + 1) = z.im;
    }
    Ok(())
}

unsafe fn read_complex(data: *const f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|i| Complex64::new(*data.add(2 * i), *data.add(2 * i + 1)))
        .collect()
}

unsafe fn matrix_ref<'a>(m: *const QgeMatrix) -> Result<&'a QgeMatrix, Failure> {
    non_null(m, "matrix")?;
    Ok(&*m)
}

fn boxed_matrix(inner: QuaternionMatrix) -> *mut QgeMatrix {
    Box::into_raw(Box::new(QgeMatrix { inner }))
}

/// Version string of the library; static, do not free.
#[no_mangle]
pub extern "C" fn qge_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The caller owns
/// the string and frees it with [`qge_string_free`].
#[no_mangle]
pub extern "C" fn qge_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .clone()
            .map_or(ptr::null_mut(), CString::into_raw)
    })
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qge_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Samples an `n×n` quaternionic Ginibre matrix for `(seed, trial)`;
/// `scaled != 0` divides it by `sqrt(2n)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_sample_ginibre(
    n: usize,
    seed: u64,
    trial: u64,
    scaled: c_int,
    out: *mut *mut QgeMatrix,
) -> QgeStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 {
            return Err(Failure::new(
                QgeStatus::InvalidArgument,
                "n must be positive",
            ));
        }
        let scaling = if scaled != 0 {
            Scaling::Circular
        } else {
            Scaling::Unscaled
        };
        let cfg = EnsembleConfig::new(EnsembleKind::Ginibre, n)
            .with_seed(seed)
            .with_scaling(scaling);
        let m = ensembles::sample_ginibre(&cfg, &mut trial_rng(seed, trial, stream::OBSERVED));
        *out = boxed_matrix(m);
        Ok(())
    })
}

/// Builds a matrix from its `2n×2n` complex embedding (`dim = 2n`,
/// `4n²` complex entries interleaved). Fails with `NotQuaternionic` if the
/// block structure does not hold.
///
/// # Safety
/// `data` must point to `2·dim·dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_from_embedding(
    data: *const f64,
    dim: usize,
    out: *mut *mut QgeMatrix,
) -> QgeStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        if dim == 0 || dim % 2 == 1 {
            return Err(Failure::new(
                QgeStatus::InvalidArgument,
                "dimension must be even and positive",
            ));
        }
        let a = ComplexMatrix::from_rows(dim, dim, read_complex(data, dim * dim));
        let m = extract_quaternionic(&a)
            .map_err(|e| Failure::new(QgeStatus::NotQuaternionic, e.to_string()))?;
        *out = boxed_matrix(m);
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_free(m: *mut QgeMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Quaternionic size `n` of the matrix (0 for NULL).
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_size(m: *const QgeMatrix) -> usize {
    if m.is_null() {
        0
    } else {
        (*m).inner.size()
    }
}

/// Writes the `2n×2n` complex embedding; `capacity` counts complex entries.
///
/// # Safety
/// `m` must be a live handle and `out` must hold `2·capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_embed(
    m: *const QgeMatrix,
    out: *mut f64,
    capacity: usize,
) -> QgeStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        non_null(out, "out")?;
        write_complex(out, capacity, m.inner.embed().as_slice())
    })
}

/// Writes the `n` upper-half-plane eigenvalue representatives.
///
/// # Safety
/// `m` must be a live handle and `out` must hold `2·capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_spectrum(
    m: *const QgeMatrix,
    out: *mut f64,
    capacity: usize,
) -> QgeStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        non_null(out, "out")?;
        let s = ensembles::spectrum(&m.inner, Scaling::Unscaled)?;
        write_complex(out, capacity, &s.lambdas)
    })
}

/// `‖M‖_F² − Σ|λ|²` of the complex embedding.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_lack_of_normality(
    m: *const QgeMatrix,
    out: *mut f64,
) -> QgeStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        non_null(out, "out")?;
        *out = spectra::lack_of_normality(&m.inner.embed())?;
        Ok(())
    })
}

/// Eigenvalues of the embedding (`2n` complex) and the matching diagonal
/// overlaps `O_ii` (`2n` reals).
///
/// # Safety
/// `m` must be a live handle; `eigenvalues` must hold `4n` doubles and
/// `diagonal` `2n` doubles, where `capacity >= 2n`.
#[no_mangle]
pub unsafe extern "C" fn qge_matrix_overlaps(
    m: *const QgeMatrix,
    eigenvalues: *mut f64,
    diagonal: *mut f64,
    capacity: usize,
) -> QgeStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        non_null(eigenvalues, "eigenvalues")?;
        non_null(diagonal, "diagonal")?;
        let o = spectra::overlap_matrix(&m.inner.embed())?;
        write_complex(eigenvalues, capacity, &o.eigenvalues)?;
        for (i, d) in o.diagonal().into_iter().enumerate() {
            *diagonal.add(i) = d;
        }
        Ok(())
    })
}

/// Pfaffian of a `dim×dim` skew-symmetric complex matrix.
///
/// # Safety
/// `data` must hold `2·dim·dim` doubles; `out` must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn qge_pfaffian(data: *const f64, dim: usize, out: *mut f64) -> QgeStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        let a = ComplexMatrix::from_rows(dim, dim, read_complex(data, dim * dim));
        let pf = pfaffian::pfaffian(&SkewMatrix::new(a)?);
        write_complex(out, 1, &[pf])
    })
}

/// `E ∏ g(|λ_i|²)` over the QGE of size `n`, for the radial polynomial
/// `g(t) = Σ coeffs[k] t^k`, computed exactly from a Pfaffian.
///
/// # Safety
/// `coeffs` must hold `len` doubles; `out` must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn qge_product_statistic(
    coeffs: *const f64,
    len: usize,
    n: usize,
    out: *mut f64,
) -> QgeStatus {
    guard(|| {
        non_null(coeffs, "coeffs")?;
        non_null(out, "out")?;
        if n == 0 || len == 0 {
            return Err(Failure::new(
                QgeStatus::InvalidArgument,
                "n and len must be positive",
            ));
        }
        let c = std::slice::from_raw_parts(coeffs, len);
        let v = pfaffian::product_statistic(&ZZbarPoly::radial(c), n)?;
        write_complex(out, 1, &[v])
    })
}

/// Runs the experiment described by a JSON run configuration (the `config`
/// object embedded in every report).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qge_run_experiment(
    config_json: *const c_char,
    out: *mut *mut QgeReport,
) -> QgeStatus {
    guard(|| {
        non_null(config_json, "config_json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure::new(QgeStatus::InvalidArgument, e.to_string()))?;
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Failure::new(QgeStatus::InvalidArgument, e.to_string()))?;
        let report = experiments::run(&cfg)?;
        *out = Box::into_raw(Box::new(QgeReport { inner: report }));
        Ok(())
    })
}

/// 1 if every asserted verdict passed, 0 otherwise (and for NULL).
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qge_report_passed(r: *const QgeReport) -> c_int {
    if r.is_null() {
        0
    } else {
        c_int::from((*r).inner.passed())
    }
}

/// The report as JSON; free with [`qge_string_free`]. NULL on failure.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qge_report_json(r: *const QgeReport) -> *mut c_char {
    if r.is_null() {
        set_error("report is null");
        return ptr::null_mut();
    }
    match serde_json::to_string(&(*r).inner) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `r` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qge_report_free(r: *mut QgeReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
