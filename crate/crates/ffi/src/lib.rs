//! C interface to the `tavis` engine.
//!
//! Conventions:
//!
//! * every fallible function returns a [`TavisStatus`] and writes results
//!   through out-pointers, which are left untouched on failure;
//! * densities and series are opaque heap handles released with their
//!   matching `*_free` function (passing `NULL` to a free function is a no-op);
//! * after a non-`TAVIS_OK` status, [`tavis_last_error_message`] describes
//!   the failure on the calling thread;
//! * panics never cross the boundary; they are reported as `TAVIS_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tavis::afa::s1_afa;
use tavis::distributions::{coherent_with, fock, thermal_with, TailPolicy, DEFAULT_TAIL_TOL};
use tavis::dynamics::{make_tlm_state, Engine, S2Pairing, Scenario};
use tavis::model::degeneracy_weight;
use tavis::{Error, HalfInt, ObservableSeries, PhotonDensity};

/// Result codes shared by every entry point.
#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TavisStatus {
    TAVIS_OK = 0,
    /// An argument is out of range or inconsistent.
    TAVIS_ERR_PARAM = 1,
    /// The eigensolver failed.
    TAVIS_ERR_NUMERICAL = 2,
    /// A density could not be truncated within tolerance.
    TAVIS_ERR_TRUNCATION = 3,
    /// A required pointer was NULL.
    TAVIS_ERR_NULL = 4,
    /// An internal panic was caught.
    TAVIS_ERR_PANIC = 5,
}

/// Field-amplitude pairing: physically exact (default).
pub const TAVIS_PAIRING_CONSISTENT: u32 = 0;
/// Field-amplitude pairing reproducing published resonant closed forms.
pub const TAVIS_PAIRING_PRINTED: u32 = 1;

/// Opaque truncated photon density.
pub struct TavisDensity(PhotonDensity);

/// Opaque time series (real or complex).
pub struct TavisSeries(ObservableSeries);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> TavisStatus {
    match e {
        Error::Parameter(_) | Error::Config(_) => TavisStatus::TAVIS_ERR_PARAM,
        Error::Numerical { .. } => TavisStatus::TAVIS_ERR_NUMERICAL,
        Error::Truncation(_) => TavisStatus::TAVIS_ERR_TRUNCATION,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (TavisStatus, String)>) -> TavisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TavisStatus::TAVIS_OK
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            TavisStatus::TAVIS_ERR_PANIC
        }
    }
}

fn lib<T>(r: tavis::Result<T>) -> Result<T, (TavisStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TavisStatus, String) {
    (TavisStatus::TAVIS_ERR_NULL, format!("{what} is NULL"))
}

fn param(msg: impl Into<String>) -> (TavisStatus, String) {
    (TavisStatus::TAVIS_ERR_PARAM, msg.into())
}

unsafe fn density_ref<'a>(d: *const TavisDensity) -> Result<&'a PhotonDensity, (TavisStatus, String)> {
    d.as_ref().map(|d| &d.0).ok_or_else(|| null("density"))
}

unsafe fn taus_slice<'a>(taus: *const f64, len: usize) -> Result<&'a [f64], (TavisStatus, String)> {
    if len == 0 {
        return Err(param("time grid is empty"));
    }
    if taus.is_null() {
        return Err(null("taus"));
    }
    Ok(std::slice::from_raw_parts(taus, len))
}

fn policy(tail_tol: f64) -> TailPolicy {
    TailPolicy { tail_tol: if tail_tol > 0.0 { tail_tol } else { DEFAULT_TAIL_TOL }, n_trunc: None }
}

unsafe fn put_density(out: *mut *mut TavisDensity, d: tavis::Result<PhotonDensity>) -> Result<(), (TavisStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let d = lib(d)?;
    *out = Box::into_raw(Box::new(TavisDensity(d)));
    Ok(())
}

unsafe fn put_series(out: *mut *mut TavisSeries, s: tavis::Result<ObservableSeries>) -> Result<(), (TavisStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let s = lib(s)?;
    *out = Box::into_raw(Box::new(TavisSeries(s)));
    Ok(())
}

/// Creates the number state `|n0⟩`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tavis_density_fock(n0: u64, out: *mut *mut TavisDensity) -> TavisStatus {
    guard(|| put_density(out, Ok(fock(n0))))
}

/// Creates a coherent state with mean `nbar`. `tail_tol <= 0` selects the default (1e-12).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tavis_density_coherent(nbar: f64, tail_tol: f64, out: *mut *mut TavisDensity) -> TavisStatus {
    guard(|| put_density(out, coherent_with(nbar, policy(tail_tol))))
}

/// Creates a thermal state with mean `nbar`. `tail_tol <= 0` selects the default (1e-12).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tavis_density_thermal(nbar: f64, tail_tol: f64, out: *mut *mut TavisDensity) -> TavisStatus {
    guard(|| put_density(out, thermal_with(nbar, policy(tail_tol))))
}

/// Reports the truncation point and the discarded probability mass.
///
/// # Safety
/// `density` must be a live handle; the out-pointers must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn tavis_density_info(
    density: *const TavisDensity,
    n_trunc: *mut u64,
    tail_mass: *mut f64,
) -> TavisStatus {
    guard(|| {
        let d = density_ref(density)?;
        if !n_trunc.is_null() {
            *n_trunc = d.n_trunc;
        }
        if !tail_mass.is_null() {
            *tail_mass = d.tail_mass;
        }
        Ok(())
    })
}

/// Releases a density. NULL is ignored.
///
/// # Safety
/// `density` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tavis_density_free(density: *mut TavisDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Photon gain `S1(τ)` with every molecule initially up.
///
/// # Safety
/// `density` must be a live handle, `taus` must point to `len` doubles and
/// `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tavis_s1_all_up(
    n_tlm: u32,
    beta: f64,
    density: *const TavisDensity,
    taus: *const f64,
    len: usize,
    out: *mut *mut TavisSeries,
) -> TavisStatus {
    guard(|| {
        let (d, t) = (density_ref(density)?, taus_slice(taus, len)?);
        put_series(out, Engine::new().s1_all_up(n_tlm, beta, d, t))
    })
}

/// Photon loss `S4(τ)` with every molecule initially down.
///
/// # Safety
/// As for [`tavis_s1_all_up`].
#[no_mangle]
pub unsafe extern "C" fn tavis_s4_all_down(
    n_tlm: u32,
    beta: f64,
    density: *const TavisDensity,
    taus: *const f64,
    len: usize,
    out: *mut *mut TavisSeries,
) -> TavisStatus {
    guard(|| {
        let (d, t) = (density_ref(density)?, taus_slice(taus, len)?);
        put_series(out, Engine::new().s4_all_down(n_tlm, beta, d, t))
    })
}

/// Complex field amplitude `S2(τ)` with every molecule initially up.
/// `pairing` is one of the `TAVIS_PAIRING_*` constants.
///
/// # Safety
/// As for [`tavis_s1_all_up`].
#[no_mangle]
pub unsafe extern "C" fn tavis_s2_all_up(
    n_tlm: u32,
    beta: f64,
    density: *const TavisDensity,
    pairing: u32,
    taus: *const f64,
    len: usize,
    out: *mut *mut TavisSeries,
) -> TavisStatus {
    guard(|| {
        let (d, t) = (density_ref(density)?, taus_slice(taus, len)?);
        let pairing = match pairing {
            TAVIS_PAIRING_CONSISTENT => S2Pairing::Consistent,
            TAVIS_PAIRING_PRINTED => S2Pairing::Printed,
            other => return Err(param(format!("unknown pairing {other}"))),
        };
        put_series(out, Engine::new().with_pairing(pairing).s2_all_up(n_tlm, beta, d, t))
    })
}

/// `⟨E⁻E⁺⟩(τ)` for a named molecular scenario (`"all_up"`, `"half_up"`,
/// `"dicke:-1.5"`, ...).
///
/// # Safety
/// As for [`tavis_s1_all_up`]; `scenario` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tavis_ee(
    n_tlm: u32,
    beta: f64,
    density: *const TavisDensity,
    scenario: *const c_char,
    taus: *const f64,
    len: usize,
    out: *mut *mut TavisSeries,
) -> TavisStatus {
    guard(|| {
        let (d, t) = (density_ref(density)?, taus_slice(taus, len)?);
        if scenario.is_null() {
            return Err(null("scenario"));
        }
        let name = CStr::from_ptr(scenario).to_str().map_err(|_| param("scenario is not UTF-8"))?;
        let sc: Scenario = lib(name.parse())?;
        let state = lib(make_tlm_state(sc, n_tlm))?;
        put_series(out, Engine::new().ee_general(n_tlm, beta, d, &state, t))
    })
}

/// Average-field approximation of `S1(τ)`.
///
/// # Safety
/// As for [`tavis_s1_all_up`].
#[no_mangle]
pub unsafe extern "C" fn tavis_s1_afa(
    n_tlm: u32,
    beta: f64,
    density: *const TavisDensity,
    taus: *const f64,
    len: usize,
    out: *mut *mut TavisSeries,
) -> TavisStatus {
    guard(|| {
        let (d, t) = (density_ref(density)?, taus_slice(taus, len)?);
        put_series(out, s1_afa(n_tlm, beta, d, t))
    })
}

/// Number of samples in a series.
///
/// # Safety
/// `series` must be a live handle and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn tavis_series_len(series: *const TavisSeries, len: *mut usize) -> TavisStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = s.0.len();
        Ok(())
    })
}

/// Copies the real parts (and, if `im` is non-NULL, the imaginary parts;
/// zero for real series) into caller buffers of exactly `len` doubles.
///
/// # Safety
/// `series` must be a live handle; `re` (and `im` if non-NULL) must point to
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tavis_series_copy(series: *const TavisSeries, re: *mut f64, im: *mut f64, len: usize) -> TavisStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        if re.is_null() {
            return Err(null("re"));
        }
        if len != s.0.len() {
            return Err(param(format!("buffer length {len} does not match series length {}", s.0.len())));
        }
        ptr::copy_nonoverlapping(s.0.re().as_ptr(), re, len);
        if !im.is_null() {
            ptr::copy_nonoverlapping(s.0.im().as_ptr(), im, len);
        }
        Ok(())
    })
}

/// Releases a series. NULL is ignored.
///
/// # Safety
/// `series` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tavis_series_free(series: *mut TavisSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Infinite-time average of `S1`.
///
/// # Safety
/// `density` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tavis_s1_stationary_mean(
    n_tlm: u32,
    beta: f64,
    density: *const TavisDensity,
    out: *mut f64,
) -> TavisStatus {
    guard(|| {
        let d = density_ref(density)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(Engine::new().s1_stationary_mean(n_tlm, beta, d))?;
        Ok(())
    })
}

/// Number of multiplets with cooperation number `r` among `n_tlm` molecules.
/// `r` must be a non-negative integer or half-integer.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tavis_degeneracy_weight(n_tlm: u32, r: f64, out: *mut f64) -> TavisStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lib(HalfInt::from_f64(r))?;
        *out = lib(degeneracy_weight(n_tlm, r))?;
        Ok(())
    })
}

/// Message for the last failure on this thread ("" after success). The
/// pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tavis_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_are_contained() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, TavisStatus::TAVIS_ERR_PANIC);
        let msg = unsafe { CStr::from_ptr(tavis_last_error_message()) }.to_str().unwrap().to_string();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Truncation("x".into())), TavisStatus::TAVIS_ERR_TRUNCATION);
        assert_eq!(status_of(&Error::Config("x".into())), TavisStatus::TAVIS_ERR_PARAM);
    }
}
