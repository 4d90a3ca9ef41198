//! C interface. Objects cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free`. Every fallible call
//! returns a status code; on failure the message is available from
//! `sl_last_error_message` on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use spectral_law::cactus::{moment_f64, narayana};
use spectral_law::io::RunConfig;
use spectral_law::montecarlo::run_trials;
use spectral_law::stieltjes::{density, ridge_trace, solve_g, DensityConfig, SpectralDensity};
use spectral_law::{ActivationConfig, ActivationSpec, Error, SpectralParams};

pub const SL_OK: i32 = 0;
/// A required pointer argument was null.
pub const SL_ERR_NULL: i32 = 1;
/// Malformed input or out-of-range argument.
pub const SL_ERR_INVALID: i32 = 2;
/// Quadrature, root finding or overflow failure.
pub const SL_ERR_NUMERICAL: i32 = 3;
/// Request exceeds a size limit, including too-small output buffers.
pub const SL_ERR_CAPACITY: i32 = 4;
/// A Rust panic was caught at the boundary.
pub const SL_ERR_PANIC: i32 = 5;

/// Limit parameters of the spectral law.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlParams {
    pub theta1: f64,
    pub theta2: f64,
    pub phi: f64,
    pub psi: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SlThetas {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

/// Centered activation built from a JSON description.
pub struct SlActivation(ActivationSpec);

/// Tabulated limiting density.
pub struct SlDensity(SpectralDensity);

/// Pooled eigenvalues of a simulation, trial after trial.
pub struct SlSpectrum(Vec<f64>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => SL_ERR_CAPACITY,
        Error::Invalid(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_) => SL_ERR_INVALID,
        Error::Overflow { .. } | Error::Quadrature { .. } | Error::EdgeDegenerate { .. } | Error::Numerical(_) => {
            SL_ERR_NUMERICAL
        }
    }
}

// Runs `body`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (i32, String)>>(body: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SL_OK,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SL_ERR_PANIC
        }
    }
}

fn lib<T>(r: spectral_law::Result<T>) -> Result<T, (i32, String)> {
    r.map_err(|e| (code_for(&e), e.to_string()))
}

fn null(what: &str) -> (i32, String) {
    (SL_ERR_NULL, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (i32, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SL_ERR_INVALID, format!("{what} is not UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (i32, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn params(p: SlParams) -> Result<SpectralParams, (i32, String)> {
    lib(SpectralParams::new(p.theta1, p.theta2, p.phi, p.psi))
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Schema tag written into every output file, as a static string.
#[no_mangle]
pub extern "C" fn sl_schema_version() -> *const c_char {
    static VERSION: &[u8] = b"spectral-law/1\0";
    VERSION.as_ptr().cast()
}

/// Builds an activation from JSON such as `{"kind": "tanh"}`, centered (and
/// optionally normalized) at `sigma = sigma_w * sigma_x`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_activation_from_json(json: *const c_char, sigma: f64, out: *mut *mut SlActivation) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = lib(ActivationConfig::from_json(text(json, "json")?))?;
        let spec = lib(cfg.build(sigma))?;
        *out = Box::into_raw(Box::new(SlActivation(spec)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from `sl_activation_from_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn sl_activation_free(handle: *mut SlActivation) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live activation; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_activation_thetas(
    handle: *const SlActivation,
    sigma_w: f64,
    sigma_x: f64,
    out: *mut SlThetas,
) -> i32 {
    guard(|| {
        let f = &handle.as_ref().ok_or_else(|| null("handle"))?.0;
        let out = out_ref(out, "out")?;
        let t = lib(f.compute_thetas(sigma_w, sigma_x))?;
        *out = SlThetas {
            theta1: t.theta1,
            theta2: t.theta2,
            theta3: t.theta3,
        };
        Ok(())
    })
}

/// # Safety
/// `handle` must be a live activation; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_activation_evaluate(handle: *const SlActivation, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        let f = &handle.as_ref().ok_or_else(|| null("handle"))?.0;
        let out = out_ref(out, "out")?;
        *out = lib(f.evaluate(x))?;
        Ok(())
    })
}

/// `q`-th limiting moment from the cactus enumeration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_cactus_moment(q: u32, p: SlParams, out: *mut f64) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = params(p)?;
        *out = lib(moment_f64(q as usize, &p))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_narayana(q: u32, k: u32, out: *mut u64) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(narayana(q as usize, k as usize))?;
        Ok(())
    })
}

/// Stieltjes transform `G(z)` at `z = z_re + i z_im`, `z_im != 0`.
///
/// # Safety
/// `g_re` and `g_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_solve_g(z_re: f64, z_im: f64, p: SlParams, g_re: *mut f64, g_im: *mut f64) -> i32 {
    guard(|| {
        let g_re = out_ref(g_re, "g_re")?;
        let g_im = out_ref(g_im, "g_im")?;
        let p = params(p)?;
        let pt = lib(solve_g(Complex64::new(z_re, z_im), &p, None))?;
        *g_re = pt.g.re;
        *g_im = pt.g.im;
        Ok(())
    })
}

/// Density by Stieltjes inversion with default settings.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_density_compute(p: SlParams, out: *mut *mut SlDensity) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let d = lib(density(&params(p)?, &DensityConfig::default()))?;
        *out = Box::into_raw(Box::new(SlDensity(d)));
        Ok(())
    })
}

/// Number of grid points, 0 for a null handle.
///
/// # Safety
/// `handle` must be a live density or null.
#[no_mangle]
pub unsafe extern "C" fn sl_density_len(handle: *const SlDensity) -> usize {
    handle.as_ref().map_or(0, |d| d.0.grid.len())
}

/// Copies grid points and density values into caller buffers of length `len`.
///
/// # Safety
/// `grid` and `rho` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_density_copy(handle: *const SlDensity, grid: *mut f64, rho: *mut f64, len: usize) -> i32 {
    guard(|| {
        let d = &handle.as_ref().ok_or_else(|| null("handle"))?.0;
        if grid.is_null() || rho.is_null() {
            return Err(null("output buffer"));
        }
        let n = d.grid.len();
        if len < n {
            return Err((SL_ERR_CAPACITY, format!("buffers hold {len} values, need {n}")));
        }
        std::slice::from_raw_parts_mut(grid, n).copy_from_slice(&d.grid);
        std::slice::from_raw_parts_mut(rho, n).copy_from_slice(&d.rho);
        Ok(())
    })
}

/// Mass of the atom at zero.
///
/// # Safety
/// `handle` must be a live density; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_density_atom(handle: *const SlDensity, out: *mut f64) -> i32 {
    guard(|| {
        let d = &handle.as_ref().ok_or_else(|| null("handle"))?.0;
        *out_ref(out, "out")? = d.atom_at_zero;
        Ok(())
    })
}

/// # Safety
/// `handle` must come from `sl_density_compute` or be null.
#[no_mangle]
pub unsafe extern "C" fn sl_density_free(handle: *mut SlDensity) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Limit of `(1/m) Tr (Y^T Y/m + gamma)^-1` and the scaled training loss.
///
/// # Safety
/// `trace` and `loss` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_ridge_trace(p: SlParams, gamma: f64, trace: *mut f64, loss: *mut f64) -> i32 {
    guard(|| {
        let trace = out_ref(trace, "trace")?;
        let loss = out_ref(loss, "loss")?;
        let r = lib(ridge_trace(&params(p)?, gamma))?;
        *trace = r.trace_per_m;
        *loss = r.expected_loss_scaled;
        Ok(())
    })
}

/// Runs the simulation described by a run-configuration JSON and keeps the
/// final-layer eigenvalues of every trial.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_simulate_json(json: *const c_char, out: *mut *mut SlSpectrum) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = lib(RunConfig::from_json(text(json, "json")?))?;
        let run = lib(cfg.prepare())?;
        let trials = lib(run_trials(&run.simulation, cfg.seed, cfg.trials))?;
        let eigs: Vec<f64> = trials.into_iter().flat_map(|t| t.eigenvalues).collect();
        *out = Box::into_raw(Box::new(SlSpectrum(eigs)));
        Ok(())
    })
}

/// # Safety
/// `handle` must be a live spectrum or null.
#[no_mangle]
pub unsafe extern "C" fn sl_spectrum_len(handle: *const SlSpectrum) -> usize {
    handle.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_spectrum_copy(handle: *const SlSpectrum, buf: *mut f64, len: usize) -> i32 {
    guard(|| {
        let s = &handle.as_ref().ok_or_else(|| null("handle"))?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < s.len() {
            return Err((SL_ERR_CAPACITY, format!("buffer holds {len} values, need {}", s.len())));
        }
        std::slice::from_raw_parts_mut(buf, s.len()).copy_from_slice(s);
        Ok(())
    })
}

/// # Safety
/// `handle` must come from `sl_simulate_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn sl_spectrum_free(handle: *mut SlSpectrum) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let code = guard(|| panic!("boom"));
        assert_eq!(code, SL_ERR_PANIC);
        let msg = unsafe { CStr::from_ptr(sl_last_error_message()) }.to_str().unwrap().to_string();
        assert_eq!(msg, "panic: boom");
    }

    #[test]
    fn error_classes() {
        assert_eq!(code_for(&Error::Invalid("x".into())), SL_ERR_INVALID);
        assert_eq!(code_for(&Error::Numerical("x".into())), SL_ERR_NUMERICAL);
        assert_eq!(code_for(&Error::Quadrature { change: 1.0, points: 3 }), SL_ERR_NUMERICAL);
        assert_eq!(
            code_for(&Error::Capacity {
                what: "q",
                requested: 2,
                limit: 1
            }),
            SL_ERR_CAPACITY
        );
        assert_eq!(guard(|| Ok(())), SL_OK);
    }

    #[test]
    fn interior_nul_is_replaced() {
        set_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(sl_last_error_message()) }.to_str().unwrap().to_string();
        assert_eq!(msg, "a b");
    }
}
