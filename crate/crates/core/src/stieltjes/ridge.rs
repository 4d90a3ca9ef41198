use num_complex::Complex64;
use serde::Serialize;

use super::equation::{equation_residual, track_root, RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::params::SpectralParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeEval {
    pub gamma: f64,
    /// Limit of `(1/m) E Tr (Y^T Y / m + gamma I)^{-1}`.
    pub trace_per_m: f64,
    /// `-gamma^2 d/dgamma trace_per_m`, the scaled expected training loss.
    pub expected_loss_scaled: f64,
}

/// `G~(-gamma)`, reached as `-gamma + i eta` with `eta` small enough that the
/// error, of order `eta^2`, is below double precision.
fn companion_on_negative_axis(params: &SpectralParams, gamma: f64) -> Result<f64> {
    let z = Complex64::new(-gamma, 1e-9 * gamma.min(1.0));
    let (g, _) = track_root(z, params)?;
    let residual = equation_residual(g, z, params);
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::Numerical(format!("ridge root at gamma = {gamma} has residual {residual:.3e}")));
    }
    let ratio = params.ratio();
    Ok((-(1.0 - ratio) / z + ratio * g).re)
}

pub fn ridge_trace(params: &SpectralParams, gamma: f64) -> Result<RidgeEval> {
    params.validate()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let trace = companion_on_negative_axis(params, gamma)?;
    let h = 1e-4 * gamma;
    let up = companion_on_negative_axis(params, gamma + h)?;
    let down = companion_on_negative_axis(params, gamma - h)?;
    Ok(RidgeEval {
        gamma,
        trace_per_m: trace,
        expected_loss_scaled: -gamma * gamma * (up - down) / (2.0 * h),
    })
}
