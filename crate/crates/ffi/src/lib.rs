// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over the qslkit model and bound estimators.
//!
//! Every fallible call returns a [`QslStatus`]; on failure the message is
//! kept per thread and can be copied out with [`qsl_last_error_message`].
//! Models are opaque handles created by [`qsl_model_new`] and released by
//! [`qsl_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use qslkit::bounds::{Classification, QslEstimator};
use qslkit::{DensityMatrix2, ModelParams, QslError, Rate};

/// Result codes. `QSL_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidState = 3,
    QuadratureFailed = 4,
    Unsupported = 5,
    /// The requested rate is undefined because C(t) vanishes nearby.
    Singular = 6,
    Panic = 7,
}

/// Opaque model handle.
pub struct QslModel {
    params: ModelParams,
    estimator: QslEstimator,
}

/// Initial state: excited population and coherence ⟨e|ρ|g⟩.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QslState {
    pub p_excited: f64,
    pub coherence_re: f64,
    pub coherence_im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QslBoundReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_inf: f64,
    pub d_measure: f64,
    pub tau_qsl: f64,
    pub ratio: f64,
    /// NaN when the reference state is mixed.
    pub bures_ratio: f64,
    pub quadrature_err: f64,
    pub stationary: bool,
    pub speed_up: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QslBuresReport {
    pub sin2_angle: f64,
    pub operator_ratio: f64,
    pub weighted_ratio: f64,
    pub quadrature_err: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &QslError) -> QslStatus {
    match err.root() {
        QslError::InvalidInput(_) => QslStatus::InvalidInput,
        QslError::InvalidState(_) => QslStatus::InvalidState,
        QslError::QuadratureFailed { .. } => QslStatus::QuadratureFailed,
        QslError::Unsupported(_) => QslStatus::Unsupported,
        QslError::Context { .. } => unreachable!(),
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (QslStatus, String)>) -> QslStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QslStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QslStatus::Panic
        }
    }
}

fn lib(err: QslError) -> (QslStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (QslStatus, String) {
    (QslStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(model: *const QslModel) -> Result<&'a QslModel, (QslStatus, String)> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (QslStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn state_from(state: *const QslState) -> Result<DensityMatrix2, (QslStatus, String)> {
    let s = state.as_ref().ok_or_else(|| null("state"))?;
    DensityMatrix2::from_parts(s.p_excited, Complex64::new(s.coherence_re, s.coherence_im)).map_err(lib)
}

/// Creates a model with coupling `gamma0`, reservoir width `lambda` and
/// detuning `delta`. The handle is written to `out` and must be released
/// with [`qsl_model_free`].
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qsl_model_new(gamma0: f64, lambda: f64, delta: f64, out: *mut *mut QslModel) -> QslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::new(gamma0, lambda, delta).map_err(lib)?;
        let handle = Box::new(QslModel { params, estimator: QslEstimator::default() });
        out.write(Box::into_raw(handle));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`qsl_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsl_model_free(model: *mut QslModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Amplitude C(t) of the excited state.
///
/// # Safety
/// `model` must be a live handle; `re` and `im` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_amplitude(model: *const QslModel, t: f64, re: *mut f64, im: *mut f64) -> QslStatus {
    guard(|| {
        let c = model_ref(model)?.params.amplitude(t).map_err(lib)?.c;
        write(re, c.re, "re")?;
        write(im, c.im, "im")
    })
}

/// Excited-state population |C(t)|².
///
/// # Safety
/// `model` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_excited_population(model: *const QslModel, t: f64, out: *mut f64) -> QslStatus {
    guard(|| {
        let p = model_ref(model)?.params.excited_population(t).map_err(lib)?;
        write(out, p, "out")
    })
}

/// Time-dependent decay rate γ(t). Returns `QSL_STATUS_SINGULAR` near a
/// zero of C(t) and leaves `out` untouched.
///
/// # Safety
/// `model` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_decay_rate(model: *const QslModel, t: f64, out: *mut f64) -> QslStatus {
    guard(|| match model_ref(model)?.params.decay_rate(t).map_err(lib)? {
        Rate::Finite(v) => write(out, v, "out"),
        Rate::Singular { zero_bracket: (a, b) } => {
            Err((QslStatus::Singular, format!("C(t) vanishes in [{a}, {b}]")))
        }
    })
}

/// Long-time rate of the weak-coupling limit.
///
/// # Safety
/// `model` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_markov_limit(model: *const QslModel, out: *mut f64) -> QslStatus {
    guard(|| write(out, model_ref(model)?.params.markov_limit(), "out"))
}

/// τ_QSL/τ_D over the window [tau_start, tau_start + tau_d] for the state
/// evolved from `state`.
///
/// # Safety
/// `model` must be a live handle, `state` readable, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_ratio(
    model: *const QslModel,
    state: *const QslState,
    tau_start: f64,
    tau_d: f64,
    out: *mut QslBoundReport,
) -> QslStatus {
    guard(|| {
        let m = model_ref(model)?;
        let rho0 = state_from(state)?;
        let r = m.estimator.qsl_ratio_from(&m.params, &rho0, tau_start, tau_d).map_err(lib)?;
        let report = QslBoundReport {
            lambda1: r.lambda1,
            lambda2: r.lambda2,
            lambda_inf: r.lambda_inf,
            d_measure: r.d_measure,
            tau_qsl: r.tau_qsl,
            ratio: r.ratio,
            bures_ratio: r.comparator_ratio.unwrap_or(f64::NAN),
            quadrature_err: r.quadrature_err,
            stationary: r.stationary,
            speed_up: r.classification() == Classification::SpeedUp,
        };
        write(out, report, "out")
    })
}

/// Population-only ratio for an initially excited atom, with the window
/// starting at `tau`.
///
/// # Safety
/// `model` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_ratio_evolved(model: *const QslModel, tau: f64, tau_d: f64, out: *mut f64) -> QslStatus {
    guard(|| {
        let m = model_ref(model)?;
        let r = m.estimator.qsl_ratio_evolved(&m.params, tau, tau_d).map_err(lib)?;
        write(out, r.ratio, "out")
    })
}

/// Bures-angle comparator for a pure initial state.
///
/// # Safety
/// `model` must be a live handle, `state` readable, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_bures(
    model: *const QslModel,
    state: *const QslState,
    tau_d: f64,
    out: *mut QslBuresReport,
) -> QslStatus {
    guard(|| {
        let m = model_ref(model)?;
        let rho0 = state_from(state)?;
        let r = m.estimator.bures_comparator(&m.params, &rho0, tau_d).map_err(lib)?;
        let report = QslBuresReport {
            sin2_angle: r.sin2_angle,
            operator_ratio: r.operator_ratio,
            weighted_ratio: r.weighted_ratio,
            quadrature_err: r.quadrature_err,
        };
        write(out, report, "out")
    })
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `len` bytes. Returns the length
/// the full message needs including the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` byte writes.
#[no_mangle]
pub unsafe extern "C" fn qsl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn qsl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
