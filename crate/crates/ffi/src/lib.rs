//! C ABI for symknot.
//!
//! Curves cross the boundary as opaque `SkCurve` handles owned by the
//! caller and released with `sk_curve_free`. Every fallible function
//! returns an `SkStatus`; on failure `sk_last_error` gives a message for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use symknot::io::{load_curve, save_curve};
use symknot::optimize::Termination;
use symknot::symmetry::is_symmetric;
use symknot::{
    bilipschitz_ratio, circle_energy_oracle, energy_gradient, minimize_symmetric, ohara_energy, scaled_energy,
    torus_knot_curve, validate_torus_spec, ClosedCurve, CyclicAction, EnergyParams, Error, OptimizerConfig, Vec3,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque closed polygon.
pub struct SkCurve(ClosedCurve);

/// Summary of a symmetric minimization.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SkReport {
    pub sym_grad_rms: f64,
    pub full_grad_rms: f64,
    pub scaled_energy: f64,
    pub iterations: usize,
    /// 1 when the gradient tolerance was reached.
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SkStatus {
    match e {
        Error::Io { .. } => SkStatus::Io,
        e if e.is_numerical() => SkStatus::Numerical,
        _ => SkStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SkStatus>) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SkStatus::Panic
        }
    }
}

fn fail(e: Error) -> SkStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> SkStatus {
    set_error(format!("{what} is null"));
    SkStatus::NullPointer
}

unsafe fn curve_ref<'a>(c: *const SkCurve) -> Result<&'a ClosedCurve, SkStatus> {
    c.as_ref().map(|c| &c.0).ok_or_else(|| null("curve"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SkStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, SkStatus> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p).to_str().map(Path::new).map_err(|_| {
        set_error("path is not valid UTF-8".into());
        SkStatus::InvalidArgument
    })
}

fn params(alpha: f64) -> Result<EnergyParams, SkStatus> {
    EnergyParams::new(alpha).map_err(fail)
}

fn boxed(c: ClosedCurve) -> *mut SkCurve {
    Box::into_raw(Box::new(SkCurve(c)))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Builds a curve from `n` interleaved `x, y, z` triples.
///
/// # Safety
/// `xyz` must point to `3 * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_curve_new(xyz: *const f64, n: usize, out: *mut *mut SkCurve) -> SkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let flat = std::slice::from_raw_parts(xyz, 3 * n);
        let pts = flat.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        *out = boxed(ClosedCurve::new(pts).map_err(fail)?);
        Ok(())
    })
}

/// # Safety
/// `curve` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sk_curve_free(curve: *mut SkCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_curve_len(curve: *const SkCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Copies the coordinates into `out` (`3 * len` doubles).
///
/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sk_curve_points(curve: *const SkCurve, out: *mut f64, capacity: usize) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if capacity < 3 * c.len() {
            set_error(format!("need {} doubles, got {capacity}", 3 * c.len()));
            return Err(SkStatus::BufferTooSmall);
        }
        let dst = std::slice::from_raw_parts_mut(out, 3 * c.len());
        for (chunk, p) in dst.chunks_exact_mut(3).zip(c.points()) {
            chunk.copy_from_slice(p.as_slice());
        }
        Ok(())
    })
}

/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_curve_load(path: *const c_char, out: *mut *mut SkCurve) -> SkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let path = path_arg(path)?;
        *out = boxed(load_curve(path).map_err(fail)?);
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sk_curve_save(curve: *const SkCurve, path: *const c_char) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        let path = path_arg(path)?;
        save_curve(c, path, None).map_err(fail)
    })
}

/// Samples the standard torus knot curve `T(a, b)` at `n` points.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_torus_curve(a: i64, b: i64, rho: f64, n: usize, out: *mut *mut SkCurve) -> SkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec = validate_torus_spec(a, b, rho).map_err(fail)?;
        *out = boxed(torus_knot_curve(&spec, n).map_err(fail)?);
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_energy(curve: *const SkCurve, alpha: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        let out = out_ref(out, "out")?;
        *out = ohara_energy(c, &params(alpha)?).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_scaled_energy(curve: *const SkCurve, alpha: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        let out = out_ref(out, "out")?;
        *out = scaled_energy(c, &params(alpha)?).map_err(fail)?;
        Ok(())
    })
}

/// Gradient of the energy (`scaled = 0`) or of the scaled energy
/// (`scaled != 0`), written as `3 * len` doubles.
///
/// # Safety
/// `grad` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sk_energy_gradient(
    curve: *const SkCurve,
    alpha: f64,
    scaled: i32,
    grad: *mut f64,
    capacity: usize,
) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        if grad.is_null() {
            return Err(null("grad"));
        }
        if capacity < 3 * c.len() {
            set_error(format!("need {} doubles, got {capacity}", 3 * c.len()));
            return Err(SkStatus::BufferTooSmall);
        }
        let g = energy_gradient(c, &params(alpha)?).map_err(fail)?;
        let field = if scaled != 0 { &g.d_scaled } else { &g.d_energy };
        let dst = std::slice::from_raw_parts_mut(grad, 3 * c.len());
        for (chunk, v) in dst.chunks_exact_mut(3).zip(field) {
            chunk.copy_from_slice(v.as_slice());
        }
        Ok(())
    })
}

/// Energy of the unit circle; `alpha` may be 2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_circle_oracle(alpha: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = EnergyParams::for_oracle(alpha).map_err(fail)?;
        *out = circle_energy_oracle(&p).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_bilipschitz_ratio(curve: *const SkCurve, out: *mut f64) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        *out_ref(out, "out")? = bilipschitz_ratio(c);
        Ok(())
    })
}

/// Tests invariance under the order-`m` action with shift parameter `k`.
///
/// # Safety
/// `curve` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sk_is_symmetric(
    curve: *const SkCurve,
    m: usize,
    k: i64,
    tol: f64,
    symmetric: *mut i32,
    residual: *mut f64,
) -> SkStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        let symmetric = out_ref(symmetric, "symmetric")?;
        let residual = out_ref(residual, "residual")?;
        let action = CyclicAction::new(m, k).map_err(fail)?;
        let (ok, r) = is_symmetric(c, &action, tol).map_err(fail)?;
        *symmetric = ok as i32;
        *residual = r;
        Ok(())
    })
}

/// Minimizes the scaled energy of `T(a, b)` among curves fixed by the
/// order-`m` action. `max_iters = 0` keeps the default. Reaching the
/// iteration limit still returns the curve, with `converged = 0`.
///
/// # Safety
/// `out_curve` and `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_minimize_symmetric(
    a: i64,
    b: i64,
    m: usize,
    alpha: f64,
    n: usize,
    max_iters: usize,
    out_curve: *mut *mut SkCurve,
    report: *mut SkReport,
) -> SkStatus {
    guard(|| {
        let out_curve = out_ref(out_curve, "out_curve")?;
        let report = out_ref(report, "report")?;
        let spec = validate_torus_spec(a, b, symknot::torus::DEFAULT_RHO).map_err(fail)?;
        let mut config = OptimizerConfig::new(alpha).map_err(fail)?;
        config.samples = n;
        if max_iters > 0 {
            config.max_iters = max_iters;
        }
        let outcome = minimize_symmetric(&spec, m, &config).map_err(fail)?;
        *report = SkReport {
            sym_grad_rms: outcome.report.sym_grad_rms,
            full_grad_rms: outcome.report.full_grad_rms,
            scaled_energy: outcome.report.scaled_energy,
            iterations: outcome.iterations,
            converged: (outcome.termination == Termination::Converged) as i32,
        };
        *out_curve = boxed(outcome.curve);
        Ok(())
    })
}
