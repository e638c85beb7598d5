//! C ABI for the steadyspin library: opaque steady-state handles, flat
//! observable structs and status codes, so other languages can drive the
//! solvers without the Rust type system.
//!
//! Every function returns an `ss_status`; on any failure the thread-local
//! message behind [`ss_last_error`] explains what went wrong.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::path::PathBuf;

use steadyspin::analytic;
use steadyspin::dicke::HusimiGridSpec;
use steadyspin::steady::{self, DensityMatrix, ModelParams, ObservableRecord};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = CString::new(msg.to_string()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Status code of every ABI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ss_status {
    SS_OK = 0,
    SS_ERR_NULL_ARGUMENT = 1,
    SS_ERR_INVALID_ARGUMENT = 2,
    SS_ERR_NUMERIC = 3,
    SS_ERR_IO = 4,
}

use ss_status::*;

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing ABI call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque steady-state handle.
pub struct ss_state {
    inner: DensityMatrix,
}

/// Scalar observables of a steady state.
#[repr(C)]
pub struct ss_observables {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub sx2: f64,
    pub var_x: f64,
    pub purity: f64,
    pub contrast: f64,
    /// squeezing parameter; meaningful only when `xi2_defined` is true
    pub xi2: f64,
    pub xi2_defined: bool,
}

impl From<&ObservableRecord> for ss_observables {
    fn from(rec: &ObservableRecord) -> Self {
        Self {
            sx: rec.sx,
            sy: rec.sy,
            sz: rec.sz,
            sx2: rec.sx2,
            var_x: rec.var_x,
            purity: rec.purity,
            contrast: rec.contrast,
            xi2: rec.xi2.unwrap_or(f64::NAN),
            xi2_defined: rec.xi2.is_some(),
        }
    }
}

fn build_state(params: ModelParams, out: *mut *mut ss_state) -> ss_status {
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    match steady::steady_state(&params) {
        Ok(inner) => {
            let handle = Box::new(ss_state { inner });
            unsafe { *out = Box::into_raw(handle) };
            SS_OK
        }
        Err(e) => {
            set_error(e);
            SS_ERR_NUMERIC
        }
    }
}

/// Exact squeezed-decay steady state (dark state for even N, mixed
/// resolvent for odd N). The handle must be released with `ss_state_free`.
#[no_mangle]
pub extern "C" fn ss_state_new_sdm(n: u32, zeta: f64, out: *mut *mut ss_state) -> ss_status {
    match ModelParams::sdm(n, zeta) {
        Ok(params) => build_state(params, out),
        Err(e) => {
            set_error(e);
            SS_ERR_INVALID_ARGUMENT
        }
    }
}

/// Exact driven-superradiance steady state.
#[no_mangle]
pub extern "C" fn ss_state_new_crf(n: u32, upsilon: f64, out: *mut *mut ss_state) -> ss_status {
    match ModelParams::crf(n, upsilon) {
        Ok(params) => build_state(params, out),
        Err(e) => {
            set_error(e);
            SS_ERR_INVALID_ARGUMENT
        }
    }
}

/// Releases a steady-state handle. Null is a no-op.
///
/// # Safety
/// `state` must come from one of the `ss_state_new_*` constructors and not
/// have been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ss_state_free(state: *mut ss_state) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Spin moments, purity and squeezing of the state.
///
/// # Safety
/// `state` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_state_observables(
    state: *const ss_state,
    out: *mut ss_observables,
) -> ss_status {
    let Some(state) = (unsafe { state.as_ref() }) else {
        set_error("state pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    };
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    let rec = steady::observables(&state.inner);
    unsafe { *out = (&rec).into() };
    SS_OK
}

/// Tr(rho^2).
///
/// # Safety
/// `state` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_state_purity(state: *const ss_state, out: *mut f64) -> ss_status {
    let Some(state) = (unsafe { state.as_ref() }) else {
        set_error("state pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    };
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    unsafe { *out = state.inner.purity() };
    SS_OK
}

/// Weight of the dominant eigenstate of the steady state.
///
/// # Safety
/// `state` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_state_dominant_weight(
    state: *const ss_state,
    out: *mut f64,
) -> ss_status {
    let Some(state) = (unsafe { state.as_ref() }) else {
        set_error("state pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    };
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    unsafe { *out = state.inner.weights().first().copied().unwrap_or(0.0) };
    SS_OK
}

/// ln of the raw dominant resolvent eigenvalue; fails for states that do
/// not come from a resolvent factorization (even-N dark states).
///
/// # Safety
/// `state` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_state_log_lambda0(
    state: *const ss_state,
    out: *mut f64,
) -> ss_status {
    let Some(state) = (unsafe { state.as_ref() }) else {
        set_error("state pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    };
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    match state.inner.log_raw() {
        Some(log_raw) if !log_raw.is_empty() => {
            unsafe { *out = log_raw[0] };
            SS_OK
        }
        _ => {
            set_error("state carries no raw resolvent spectrum");
            SS_ERR_INVALID_ARGUMENT
        }
    }
}

/// Writes the Husimi distribution of the state to `path` as CSV
/// (columns theta, phi, q; row-major in theta).
///
/// # Safety
/// `state` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ss_state_husimi_csv(
    state: *const ss_state,
    n_theta: u32,
    n_phi: u32,
    path: *const c_char,
) -> ss_status {
    let Some(state) = (unsafe { state.as_ref() }) else {
        set_error("state pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    };
    if path.is_null() {
        set_error("path pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    let path = match unsafe { std::ffi::CStr::from_ptr(path) }.to_str() {
        Ok(s) => PathBuf::from(s),
        Err(_) => {
            set_error("path is not valid UTF-8");
            return SS_ERR_INVALID_ARGUMENT;
        }
    };
    if n_theta == 0 || n_phi == 0 {
        set_error("grid must have at least one point per axis");
        return SS_ERR_INVALID_ARGUMENT;
    }
    let grid = match state.inner.husimi(&HusimiGridSpec {
        n_theta: n_theta as usize,
        n_phi: n_phi as usize,
    }) {
        Ok(g) => g,
        Err(e) => {
            set_error(e);
            return SS_ERR_NUMERIC;
        }
    };
    let file = match std::fs::File::create(&path) {
        Ok(f) => f,
        Err(e) => {
            set_error(format!("{}: {e}", path.display()));
            return SS_ERR_IO;
        }
    };
    match grid.write_csv(std::io::BufWriter::new(file)) {
        Ok(()) => SS_OK,
        Err(e) => {
            set_error(e);
            SS_ERR_IO
        }
    }
}

unsafe fn fast_observables(
    params: steadyspin::Result<ModelParams>,
    out: *mut ss_observables,
) -> ss_status {
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    let params = match params {
        Ok(p) => p,
        Err(e) => {
            set_error(e);
            return SS_ERR_INVALID_ARGUMENT;
        }
    };
    match steady::trace_observables(&params) {
        Ok(rec) => {
            unsafe { *out = (&rec).into() };
            SS_OK
        }
        Err(e) => {
            set_error(e);
            SS_ERR_NUMERIC
        }
    }
}

/// Observables straight from the fast linear-solve route, without keeping
/// a state handle around.
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_observables_sdm(
    n: u32,
    zeta: f64,
    out: *mut ss_observables,
) -> ss_status {
    unsafe { fast_observables(ModelParams::sdm(n, zeta), out) }
}

/// CRF counterpart of `ss_observables_sdm`.
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_observables_crf(
    n: u32,
    upsilon: f64,
    out: *mut ss_observables,
) -> ss_status {
    unsafe { fast_observables(ModelParams::crf(n, upsilon), out) }
}

/// Modified Bessel function I_order(x); `scaled` returns e^{-x} I_order(x).
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_bessel_i(
    order: u32,
    x: f64,
    scaled: bool,
    out: *mut f64,
) -> ss_status {
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    if order > 1 {
        set_error("order must be 0 or 1");
        return SS_ERR_INVALID_ARGUMENT;
    }
    match steadyspin::special::bessel_i(order as u8, x, scaled) {
        Ok(v) => {
            unsafe { *out = v };
            SS_OK
        }
        Err(e) => {
            set_error(e);
            SS_ERR_INVALID_ARGUMENT
        }
    }
}

/// W_{-1} branch of the Lambert function on (-1/e, 0).
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_lambert_w_minus1(x: f64, out: *mut f64) -> ss_status {
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    match steadyspin::special::lambert_w_minus1(x) {
        Ok(v) => {
            unsafe { *out = v };
            SS_OK
        }
        Err(e) => {
            set_error(e);
            SS_ERR_INVALID_ARGUMENT
        }
    }
}

/// Location and depth of the optimal-squeezing minimum: exact Lambert-W
/// form plus the large-N logarithmic expansion.
#[repr(C)]
pub struct ss_optimum {
    /// zeta_min (SDM) or |eta|_min (CRF)
    pub parameter: f64,
    pub xi2_min: f64,
    pub parameter_expanded: f64,
    pub xi2_min_expanded: f64,
}

/// Squeezed-decay optimum (odd N >= 11).
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_sdm_optimum(n: u32, out: *mut ss_optimum) -> ss_status {
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    match analytic::sdm_optimum(n) {
        Ok(v) => {
            unsafe {
                *out = ss_optimum {
                    parameter: v.zeta_min,
                    xi2_min: v.xi2_min,
                    parameter_expanded: v.zeta_min_expanded,
                    xi2_min_expanded: v.xi2_min_expanded,
                }
            };
            SS_OK
        }
        Err(e) => {
            set_error(e);
            SS_ERR_INVALID_ARGUMENT
        }
    }
}

/// Driven-superradiance optimum (N >= 10); `parameter` is |eta|_min.
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ss_crf_optimum(n: u32, out: *mut ss_optimum) -> ss_status {
    if out.is_null() {
        set_error("out pointer is null");
        return SS_ERR_NULL_ARGUMENT;
    }
    match analytic::crf_optimum(n) {
        Ok(v) => {
            unsafe {
                *out = ss_optimum {
                    parameter: v.abs_eta_min,
                    xi2_min: v.xi2_min,
                    parameter_expanded: v.abs_eta_min_expanded,
                    xi2_min_expanded: v.xi2_min_expanded,
                }
            };
            SS_OK
        }
        Err(e) => {
            set_error(e);
            SS_ERR_INVALID_ARGUMENT
        }
    }
}
