//! C ABI over `rmt_linstats`.
//!
//! Every fallible call returns an [`RmtStatus`]; on failure the message is
//! kept per thread and read back with [`rmt_last_error`]. Ensembles and
//! statistics are opaque handles released with their `_free` functions.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rmt_linstats::asympt::{expansion, AsymptResolution};
use rmt_linstats::ensembles::{finite_moments, mgf_beta2, mgf_squared, EnsembleSpec, Family, Resolution, Statistic};
use rmt_linstats::error::Error;
use rmt_linstats::mcsample::{sample, Method};
use rmt_linstats::operator::{StatFamily, TestFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Invalid = 3,
    Unsupported = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtFamily {
    Gaussian = 0,
    Laguerre = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtStatFamily {
    Gaussian = 0,
    Lorentzian = 1,
    HalfBump = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtMethod {
    Tridiagonal = 0,
    Mcmc = 1,
}

/// Opaque ensemble handle.
pub struct RmtEnsemble(EnsembleSpec);

/// Opaque statistic handle.
pub struct RmtStatistic(TestFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RmtStatus {
    match e {
        Error::Domain(_) => RmtStatus::Domain,
        Error::Validation(_) => RmtStatus::Invalid,
        Error::Unsupported(_) => RmtStatus::Unsupported,
        Error::Numerical(_) => RmtStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RmtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmtStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RmtStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RmtStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    p.write(v);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rmt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Create an ensemble. `alpha` is ignored for the Gaussian family.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_ensemble_new(
    family: RmtFamily,
    beta: u8,
    n: usize,
    alpha: f64,
    out: *mut *mut RmtEnsemble,
) -> RmtStatus {
    guard(|| {
        let family = match family {
            RmtFamily::Gaussian => Family::Gaussian,
            RmtFamily::Laguerre => Family::Laguerre,
        };
        let alpha = if family == Family::Gaussian { 0.0 } else { alpha };
        let spec = EnsembleSpec::new(family, beta, n, alpha)?;
        put(out, Box::into_raw(Box::new(RmtEnsemble(spec))), "out")
    })
}

/// # Safety
/// `ens` must be NULL or a handle from [`rmt_ensemble_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmt_ensemble_free(ens: *mut RmtEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Create a statistic `F` of the given shape.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_statistic_new(
    family: RmtStatFamily,
    amplitude: f64,
    center: f64,
    width: f64,
    out: *mut *mut RmtStatistic,
) -> RmtStatus {
    guard(|| {
        let family = match family {
            RmtStatFamily::Gaussian => StatFamily::Gaussian,
            RmtStatFamily::Lorentzian => StatFamily::Lorentzian,
            RmtStatFamily::HalfBump => StatFamily::HalfBump,
        };
        let f = TestFunction::new(family, amplitude, center, width)?;
        put(out, Box::into_raw(Box::new(RmtStatistic(f))), "out")
    })
}

/// # Safety
/// `stat` must be NULL or a handle from [`rmt_statistic_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmt_statistic_free(stat: *mut RmtStatistic) {
    if !stat.is_null() {
        drop(Box::from_raw(stat));
    }
}

/// `E exp(−λ Σ F(scaled x_j))` from the determinant formulas, with its
/// discretization discrepancy.
///
/// # Safety
/// Handles must be live; `value` and `discrepancy` must be writable
/// (`discrepancy` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn rmt_mgf(
    ens: *const RmtEnsemble,
    stat: *const RmtStatistic,
    lambda: f64,
    value: *mut f64,
    discrepancy: *mut f64,
) -> RmtStatus {
    guard(|| {
        let spec = get(ens, "ensemble")?.0;
        let stat = Statistic::scaled(&spec, get(stat, "statistic")?.0);
        let res = Resolution::default();
        let (g, d) = if spec.beta == 2 {
            let v = mgf_beta2(&spec, &stat, lambda, &res)?;
            (v.value, v.discrepancy)
        } else {
            let v = mgf_squared(&spec, &stat, lambda, &res)?;
            if v.value < 0.0 {
                return Err(Error::Numerical(format!("negative [G]^2 = {}", v.value)).into());
            }
            let g = v.value.sqrt();
            (g, v.discrepancy / (2.0 * g))
        };
        put(value, g, "value")?;
        if !discrepancy.is_null() {
            discrepancy.write(d);
        }
        Ok(())
    })
}

/// Exact finite-N mean and variance of the scaled statistic.
///
/// # Safety
/// Handles must be live; `mean` and `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_finite_moments(
    ens: *const RmtEnsemble,
    stat: *const RmtStatistic,
    mean: *mut f64,
    variance: *mut f64,
) -> RmtStatus {
    guard(|| {
        let spec = get(ens, "ensemble")?.0;
        let stat = Statistic::scaled(&spec, get(stat, "statistic")?.0);
        let m = finite_moments(&spec, &stat, &Resolution::default())?;
        put(mean, m.mean, "mean")?;
        put(variance, m.variance, "variance")
    })
}

/// Large-N mean and variance through order `1/N`.
///
/// # Safety
/// Handles must be live; `mean` and `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_expansion(
    ens: *const RmtEnsemble,
    stat: *const RmtStatistic,
    mean: *mut f64,
    variance: *mut f64,
) -> RmtStatus {
    guard(|| {
        let spec = get(ens, "ensemble")?.0;
        let r = expansion(&spec, &get(stat, "statistic")?.0, &AsymptResolution::default())?;
        put(mean, r.mean, "mean")?;
        put(variance, r.variance, "variance")
    })
}

/// Draw `count` eigenvalue vectors into `out`, row-major, which must hold
/// `count · N` doubles (`out_len`). Eigenvalues are on the unscaled axis.
///
/// # Safety
/// `ens` must be live and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rmt_sample(
    ens: *const RmtEnsemble,
    method: RmtMethod,
    count: usize,
    seed: u64,
    out: *mut f64,
    out_len: usize,
) -> RmtStatus {
    guard(|| {
        let spec = get(ens, "ensemble")?.0;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        if count.checked_mul(spec.n) != Some(out_len) {
            return Err(Error::Validation(format!("buffer holds {out_len} doubles, need {count} x {}", spec.n)).into());
        }
        let method = match method {
            RmtMethod::Tridiagonal => Method::Tridiagonal,
            RmtMethod::Mcmc => Method::Mcmc,
        };
        let batch = sample(&spec, count, seed, method)?;
        let buf = std::slice::from_raw_parts_mut(out, out_len);
        for (dst, row) in buf.chunks_exact_mut(spec.n).zip(&batch.samples) {
            dst.copy_from_slice(row);
        }
        Ok(())
    })
}
