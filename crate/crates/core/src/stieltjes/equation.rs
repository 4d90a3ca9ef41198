use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SpectralParams;
use crate::poly;

/// Accepted roots must satisfy the uncleared equation to this absolute level.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Geometric ratio of the imaginary part between continuation steps.
const DESCENT_RATIO: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesPoint {
    pub z: Complex64,
    pub g: Complex64,
    pub g_tilde: Complex64,
    pub h: Complex64,
    pub residual: f64,
}

/// `G~ = -(1 - phi/psi)/z + (phi/psi) G`: the transform of the spectral law
/// of `Y^T Y / m` given that of `Y Y^T / m`.
pub fn companion_transform(g: Complex64, z: Complex64, phi: f64, psi: f64) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::invalid(format!("z = {z} lies on the real axis")));
    }
    Ok(companion_unchecked(g, z, phi / psi))
}

fn companion_unchecked(g: Complex64, z: Complex64, ratio: f64) -> Complex64 {
    -(1.0 - ratio) / z + ratio * g
}

/// `H = (psi - 1)/psi - z G / psi`.
pub fn h_transform(g: Complex64, z: Complex64, psi: f64) -> Complex64 {
    (psi - 1.0) / psi - z * g / psi
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients `c_0..c_4` (ascending in `G`) of the fixed-point equation
/// with `H` and `G~` eliminated and the denominator cleared:
///
/// `(-1 - zG)(psi - theta2 P) - (theta1 - theta2) P (psi - theta2 P) - psi theta2 P = 0`
///
/// where `P = z G G~ = (phi/psi) z G^2 - (1 - phi/psi) G`.
pub fn quartic_coefficients(z: Complex64, params: &SpectralParams) -> [Complex64; 5] {
    let SpectralParams {
        theta1,
        theta2,
        psi,
        ..
    } = *params;
    let ratio = params.ratio();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let p = [zero, -(1.0 - ratio) * one, ratio * z];
    let a = [psi * one, -theta2 * p[1], -theta2 * p[2]];
    let b = [-one, -z];

    let mut out = [zero; 5];
    for (k, c) in poly_mul(&b, &a).into_iter().enumerate() {
        out[k] += c;
    }
    for (k, c) in poly_mul(&p, &a).into_iter().enumerate() {
        out[k] -= (theta1 - theta2) * c;
    }
    for (k, &c) in p.iter().enumerate() {
        out[k] -= psi * theta2 * c;
    }
    out
}

/// Absolute value of `H/z - 1/z - G G~ (theta1 - theta2)/psi - G G~ theta2 / (psi - z G G~ theta2)`.
pub fn equation_residual(g: Complex64, z: Complex64, params: &SpectralParams) -> f64 {
    let gt = companion_unchecked(g, z, params.ratio());
    let h = h_transform(g, z, params.psi);
    let ggt = g * gt;
    let lhs = h / z;
    let rhs = 1.0 / z
        + ggt * (params.theta1 - params.theta2) / params.psi
        + ggt * params.theta2 / (params.psi - z * ggt * params.theta2);
    (lhs - rhs).norm()
}

/// All roots in `G` of the deflated quartic at `z`.
pub fn candidate_roots(z: Complex64, params: &SpectralParams) -> Result<Vec<Complex64>> {
    let coeffs = quartic_coefficients(z, params);
    poly::roots(poly::deflate(&coeffs))
}

fn nearest(roots: &[Complex64], target: Complex64) -> Option<(Complex64, f64, f64)> {
    let mut best: Option<(Complex64, f64)> = None;
    let mut second = f64::INFINITY;
    for &r in roots {
        let d = (r - target).norm();
        match best {
            Some((_, bd)) if d >= bd => second = second.min(d),
            Some((_, bd)) => {
                second = bd;
                best = Some((r, d));
            }
            None => best = Some((r, d)),
        }
    }
    best.map(|(r, d)| (r, d, second))
}

/// Rough upper bound on the support; sets where continuation starts.
fn start_height(x: f64, params: &SpectralParams) -> f64 {
    let lam = params.ratio();
    let edge = (params.theta1 + params.theta2) * (1.0 + lam.sqrt()).powi(2) * (1.0 + 1.0 / params.psi);
    20.0 * (1.0 + edge + x.abs())
}

/// Follows the physical branch from `Re z + i Y` (where `G ~ -1/z`) straight
/// down to `z`, choosing at every step the root nearest a linear predictor.
/// Requires `Im z > 0`. The root's imaginary part is not checked here.
pub(crate) fn track_root(z: Complex64, params: &SpectralParams) -> Result<(Complex64, Vec<Complex64>)> {
    track_root_with(z, params, DESCENT_RATIO)
}

pub(crate) fn track_root_with(z: Complex64, params: &SpectralParams, ratio: f64) -> Result<(Complex64, Vec<Complex64>)> {
    debug_assert!(z.im > 0.0);
    let target = z.im;
    let mut y = start_height(z.re, params).max(target);
    let at = |y: f64| Complex64::new(z.re, y);

    let roots = candidate_roots(at(y), params)?;
    let (mut g, _, _) = nearest(&roots, -1.0 / at(y)).ok_or_else(|| no_roots(at(y)))?;
    if y == target {
        return Ok((g, roots));
    }
    let mut prev: Option<(f64, Complex64)> = None;
    let mut last_roots = roots;
    let mut steps = 0usize;
    while y > target {
        let mut next = (y * ratio).max(target);
        loop {
            steps += 1;
            if steps > 20_000 {
                return Err(Error::Numerical(format!("root continuation to z = {z} did not terminate")));
            }
            let predicted = match prev {
                Some((py, pg)) => g + (g - pg) * ((next - y) / (y - py)),
                None => g,
            };
            let roots = candidate_roots(at(next), params)?;
            let (r, d, second) = nearest(&roots, predicted).ok_or_else(|| no_roots(at(next)))?;
            // Ambiguous choice: shrink the step unless it is already tiny.
            let step = y - next;
            if second < 3.0 * d && step > 1e-6 * y {
                next = y - 0.5 * step;
                continue;
            }
            prev = Some((y, g));
            g = r;
            y = next;
            last_roots = roots;
            break;
        }
    }
    Ok((g, last_roots))
}

fn no_roots(z: Complex64) -> Error {
    Error::EdgeDegenerate { z, roots: Vec::new() }
}

fn point(z: Complex64, g: Complex64, params: &SpectralParams) -> StieltjesPoint {
    StieltjesPoint {
        z,
        g,
        g_tilde: companion_unchecked(g, z, params.ratio()),
        h: h_transform(g, z, params.psi),
        residual: equation_residual(g, z, params),
    }
}

fn conjugate(p: StieltjesPoint) -> StieltjesPoint {
    StieltjesPoint {
        z: p.z.conj(),
        g: p.g.conj(),
        g_tilde: p.g_tilde.conj(),
        h: p.h.conj(),
        residual: p.residual,
    }
}

/// The Stieltjes transform of the limiting law at `z` off the real axis.
///
/// With a `hint`, the root with `Im G > 0` nearest the hint is returned;
/// otherwise the branch is followed down from large `Im z`. For `Im z < 0`
/// the result is the conjugate of the solution at `conj(z)`.
pub fn solve_g(z: Complex64, params: &SpectralParams, hint: Option<Complex64>) -> Result<StieltjesPoint> {
    params.validate()?;
    if !z.is_finite() || z.im == 0.0 {
        return Err(Error::invalid(format!("z = {z} must be finite and off the real axis")));
    }
    if z.im < 0.0 {
        return solve_g(z.conj(), params, hint.map(|h| h.conj())).map(conjugate);
    }
    let g = match hint {
        Some(h) => {
            let roots = candidate_roots(z, params)?;
            let upper: Vec<Complex64> = roots.iter().copied().filter(|r| r.im > 0.0).collect();
            upper
                .iter()
                .copied()
                .min_by(|a, b| {
                    let key = |r: &Complex64| ((r - h).norm(), equation_residual(*r, z, params));
                    key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
                })
                .ok_or(Error::EdgeDegenerate { z, roots })?
        }
        None => {
            let (g, roots) = track_root(z, params)?;
            if g.im <= 0.0 {
                return Err(Error::EdgeDegenerate { z, roots });
            }
            g
        }
    };
    let p = point(z, g, params);
    if !(p.residual < RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "root G = {g} at z = {z} has residual {:.3e}",
            p.residual
        )));
    }
    Ok(p)
}
