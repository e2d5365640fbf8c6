//! C ABI over the fbdp library.
//!
//! Every function returns an [`FbdpStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and read with
//! [`fbdp_last_error`]. Models and ψ tables are opaque handles released by
//! their `_free` functions.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fbdp::adm::{build_psi, pmf_adm_table, PsiTable};
use fbdp::linear::{extinction_cdf, mean_linear, pmf_linear, LinearParams, DEFAULT_L_MAX};
use fbdp::mc::uniformization_pmf;
use fbdp::special_fn::ml::ml_two;
use fbdp::{FbdpError, FractionalOrder, RateModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbdpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    AlphaOutOfRange = 3,
    NonFinite = 4,
    TableExtent = 5,
    KBeyondTable = 6,
    Quadrature = 7,
    Truncation = 8,
    Regime = 9,
    Overflow = 10,
    Other = 11,
    Panic = 12,
    /// value written, but the series terms kept growing
    Divergent = 13,
    /// value written, but the tolerance was not met within k_max
    Unconverged = 14,
}

/// Rate model handle.
pub struct FbdpModel(RateModel);

/// ψ table handle.
pub struct FbdpPsi(PsiTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &FbdpError) -> FbdpStatus {
    match e {
        FbdpError::InvalidParameter(_) | FbdpError::Parse { .. } => FbdpStatus::InvalidParameter,
        FbdpError::AlphaOutOfRange(_) => FbdpStatus::AlphaOutOfRange,
        FbdpError::NonFinite(_) => FbdpStatus::NonFinite,
        FbdpError::TableExtent { .. } => FbdpStatus::TableExtent,
        FbdpError::KBeyondTable { .. } => FbdpStatus::KBeyondTable,
        FbdpError::Quadrature { .. } => FbdpStatus::Quadrature,
        FbdpError::Truncation { .. } => FbdpStatus::Truncation,
        FbdpError::Regime(_) => FbdpStatus::Regime,
        FbdpError::Overflow(_) => FbdpStatus::Overflow,
        _ => FbdpStatus::Other,
    }
}

enum Fail {
    Null(&'static str),
    Lib(FbdpError),
}

impl From<FbdpError> for Fail {
    fn from(e: FbdpError) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FbdpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FbdpStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FbdpStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside fbdp".to_owned());
            FbdpStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fbdp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Linear rates λₙ = nλ, μₙ = nμ.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fbdp_model_linear(
    lambda: f64,
    mu: f64,
    out: *mut *mut FbdpModel,
) -> FbdpStatus {
    guard(|| {
        let m = RateModel::linear(lambda, mu)?;
        write(out, Box::into_raw(Box::new(FbdpModel(m))), "out")
    })
}

/// Tabulated rates on states 0..len-1.
///
/// # Safety
/// `lambdas` and `mus` must each point to `len` readable doubles and `out`
/// to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fbdp_model_table(
    lambdas: *const f64,
    mus: *const f64,
    len: usize,
    out: *mut *mut FbdpModel,
) -> FbdpStatus {
    guard(|| {
        if lambdas.is_null() || mus.is_null() {
            return Err(Fail::Null("rates"));
        }
        let l = std::slice::from_raw_parts(lambdas, len).to_vec();
        let m = std::slice::from_raw_parts(mus, len).to_vec();
        let model = RateModel::table(l, m)?;
        write(out, Box::into_raw(Box::new(FbdpModel(model))), "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle from a `fbdp_model_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn fbdp_model_free(model: *mut FbdpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// ψ_{n,k} for 0 ≤ k ≤ k_max.
///
/// # Safety
/// `model` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_psi_build(
    model: *const FbdpModel,
    k_max: usize,
    out: *mut *mut FbdpPsi,
) -> FbdpStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let psi = build_psi(&m.0, k_max)?;
        write(out, Box::into_raw(Box::new(FbdpPsi(psi))), "out")
    })
}

/// # Safety
/// `psi` must be a live table handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_psi_get(
    psi: *const FbdpPsi,
    n: usize,
    k: usize,
    out: *mut f64,
) -> FbdpStatus {
    guard(|| {
        let v = deref(psi, "psi")?.0.get(n, k)?;
        write(out, v, "out")
    })
}

/// # Safety
/// `psi` must be NULL or a handle from [`fbdp_psi_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fbdp_psi_free(psi: *mut FbdpPsi) {
    if !psi.is_null() {
        drop(Box::from_raw(psi));
    }
}

/// Pr{N(t) = n} from the decomposition series on a built table, stopped at
/// relative tolerance `tol`. The partial sum is written even when the status
/// is `Divergent` or `Unconverged`.
///
/// # Safety
/// `psi` must be a live table handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_pmf_adm(
    psi: *const FbdpPsi,
    alpha: f64,
    n: usize,
    t: f64,
    tol: f64,
    out: *mut f64,
) -> FbdpStatus {
    let mut diag = None;
    let s = guard(|| {
        let table = deref(psi, "psi")?;
        let (v, d) = pmf_adm_table(&table.0, FractionalOrder::new(alpha)?, n, t, tol)?;
        diag = Some(d);
        write(out, v, "out")
    });
    match diag {
        Some(d) if s == FbdpStatus::Ok && d.divergence_flag => {
            set_error(format!("series diverges after {} terms", d.terms_used));
            FbdpStatus::Divergent
        }
        Some(d) if s == FbdpStatus::Ok && !d.converged => {
            set_error(format!("series not converged after {} terms", d.terms_used));
            FbdpStatus::Unconverged
        }
        _ => s,
    }
}

/// Classical law on states 0..=n_max at time t. `probs` receives n_max + 1
/// values and `leak` the mass pushed past n_max.
///
/// # Safety
/// `model` must be a live handle, `probs` must point to n_max + 1 writable
/// doubles and `leak` to one.
#[no_mangle]
pub unsafe extern "C" fn fbdp_uniformization_pmf(
    model: *const FbdpModel,
    n_max: usize,
    t: f64,
    probs: *mut f64,
    leak: *mut f64,
) -> FbdpStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if probs.is_null() {
            return Err(Fail::Null("probs"));
        }
        let u = uniformization_pmf(&m.0, n_max, t)?;
        let dst = std::slice::from_raw_parts_mut(probs, n_max + 1);
        for (i, d) in dst.iter_mut().enumerate() {
            *d = u.get(i);
        }
        write(leak, u.leak, "leak")
    })
}

/// Two-parameter Mittag-Leffler function E_{α,β}(x).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_ml(alpha: f64, beta: f64, x: f64, out: *mut f64) -> FbdpStatus {
    guard(|| write(out, ml_two(alpha, beta, x)?, "out"))
}

/// Pr{N(t) = n} for linear rates.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_pmf_linear(
    lambda: f64,
    mu: f64,
    alpha: f64,
    n: usize,
    t: f64,
    out: *mut f64,
) -> FbdpStatus {
    guard(|| {
        let p = LinearParams::new(lambda, mu, alpha)?;
        write(out, pmf_linear(&p, n, t, DEFAULT_L_MAX)?, "out")
    })
}

/// E N(t) for linear rates.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_mean_linear(
    lambda: f64,
    mu: f64,
    alpha: f64,
    t: f64,
    out: *mut f64,
) -> FbdpStatus {
    guard(|| {
        let p = LinearParams::new(lambda, mu, alpha)?;
        write(out, mean_linear(&p, t)?, "out")
    })
}

/// Pr{T ≤ t} for the extinction time under linear rates.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbdp_extinction_cdf(
    lambda: f64,
    mu: f64,
    alpha: f64,
    t: f64,
    out: *mut f64,
) -> FbdpStatus {
    guard(|| {
        let p = LinearParams::new(lambda, mu, alpha)?;
        write(out, extinction_cdf(&p, t)?, "out")
    })
}
