//! Calls through the exported C functions from Rust.

use std::ffi::{CStr, CString};
use std::ptr;

use spectral_law_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sl_last_error_message()) }.to_string_lossy().into_owned()
}

const MP1: SlParams = SlParams {
    theta1: 1.0,
    theta2: 0.0,
    phi: 1.0,
    psi: 1.0,
};

#[test]
fn activation_round_trip() {
    let json = CString::new(r#"{"kind": "cos"}"#).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { sl_activation_from_json(json.as_ptr(), 1.0, &mut f) }, SL_OK);
    let mut t = SlThetas::default();
    assert_eq!(unsafe { sl_activation_thetas(f, 1.0, 1.0, &mut t) }, SL_OK);
    let expected = 0.5 * (1.0 + (-2.0f64).exp()) - (-1.0f64).exp();
    assert!((t.theta1 - expected).abs() < 1e-12);
    let mut y = 0.0;
    assert_eq!(unsafe { sl_activation_evaluate(f, 0.0, &mut y) }, SL_OK);
    assert!((y - (1.0 - (-0.5f64).exp())).abs() < 1e-13);
    unsafe { sl_activation_free(f) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let bad = CString::new(r#"{"kind": "nope"}"#).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { sl_activation_from_json(bad.as_ptr(), 1.0, &mut f) }, SL_ERR_INVALID);
    assert!(f.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { sl_activation_from_json(ptr::null(), 1.0, &mut f) }, SL_ERR_NULL);
    assert!(last_error().contains("json"));

    let mut v = 0.0;
    assert_eq!(unsafe { sl_cactus_moment(20, MP1, &mut v) }, SL_ERR_CAPACITY);
    let bad_params = SlParams { theta2: 2.0, ..MP1 };
    assert_eq!(unsafe { sl_cactus_moment(2, bad_params, &mut v) }, SL_ERR_INVALID);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { sl_solve_g(1.0, 0.0, MP1, &mut re, &mut im) }, SL_ERR_INVALID);
}

#[test]
fn moments_and_narayana() {
    let mut v = 0.0;
    for q in 1..=5u32 {
        assert_eq!(unsafe { sl_cactus_moment(q, MP1, &mut v) }, SL_OK);
        // MP(1) moments are Catalan numbers
        let catalan = [1.0, 2.0, 5.0, 14.0, 42.0][q as usize - 1];
        assert_eq!(v, catalan);
    }
    let mut n = 0u64;
    assert_eq!(unsafe { sl_narayana(4, 1, &mut n) }, SL_OK);
    assert_eq!(n, 6);
}

#[test]
fn solver_density_and_ridge() {
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { sl_solve_g(-1.0, 1e-12, MP1, &mut re, &mut im) }, SL_OK);
    assert!((re - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-9);

    let mut d = ptr::null_mut();
    let p = SlParams { phi: 2.0, ..MP1 };
    assert_eq!(unsafe { sl_density_compute(p, &mut d) }, SL_OK);
    let n = unsafe { sl_density_len(d) };
    assert!(n > 100);
    let mut grid = vec![0.0; n];
    let mut rho = vec![0.0; n];
    assert_eq!(unsafe { sl_density_copy(d, grid.as_mut_ptr(), rho.as_mut_ptr(), n - 1) }, SL_ERR_CAPACITY);
    assert_eq!(unsafe { sl_density_copy(d, grid.as_mut_ptr(), rho.as_mut_ptr(), n) }, SL_OK);
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    assert!(rho.iter().all(|&r| r >= 0.0));
    let mut atom = 0.0;
    assert_eq!(unsafe { sl_density_atom(d, &mut atom) }, SL_OK);
    assert!((atom - 0.5).abs() < 1e-15);
    unsafe { sl_density_free(d) };

    let (mut trace, mut loss) = (0.0, 0.0);
    assert_eq!(unsafe { sl_ridge_trace(MP1, 1.0, &mut trace, &mut loss) }, SL_OK);
    assert!((trace - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-8);
    assert!(loss > 0.0);
}

#[test]
fn simulation_is_reproducible() {
    let json = CString::new(r#"{"shape": {"n0": 60, "n1": 60, "m": 60}, "activation": {"kind": "tanh"}, "trials": 2, "seed": 3}"#).unwrap();
    let run = || {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { sl_simulate_json(json.as_ptr(), &mut s) }, SL_OK);
        let n = unsafe { sl_spectrum_len(s) };
        let mut buf = vec![0.0; n];
        assert_eq!(unsafe { sl_spectrum_copy(s, buf.as_mut_ptr(), n) }, SL_OK);
        unsafe { sl_spectrum_free(s) };
        buf
    };
    let a = run();
    assert_eq!(a.len(), 120);
    assert_eq!(a, run());
    assert_eq!(unsafe { CStr::from_ptr(sl_schema_version()) }.to_str().unwrap(), "spectral-law/1");
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        sl_activation_free(ptr::null_mut());
        sl_density_free(ptr::null_mut());
        sl_spectrum_free(ptr::null_mut());
        assert_eq!(sl_density_len(ptr::null()), 0);
        assert_eq!(sl_spectrum_len(ptr::null()), 0);
    }
    let mut v = 0.0;
    assert_eq!(unsafe { sl_density_atom(ptr::null(), &mut v) }, SL_ERR_NULL);
}
