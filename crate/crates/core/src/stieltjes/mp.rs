//! Closed forms for the Marchenko–Pastur law of shape `lambda` and scale `s`:
//! the limit of `s X X^T / m` for `X` of size `n x m` with `n / m -> lambda`.

use num_complex::Complex64;

use super::density::SpectralDensity;
use crate::error::{Error, Result};

/// Support endpoints `s (1 -+ sqrt(lambda))^2`.
pub fn mp_edges(lambda: f64, scale: f64) -> (f64, f64) {
    let r = lambda.sqrt();
    (scale * (1.0 - r).powi(2), scale * (1.0 + r).powi(2))
}

/// Mass at zero, `1 - 1/lambda` when `lambda > 1`.
pub fn mp_atom(lambda: f64) -> f64 {
    (1.0 - 1.0 / lambda).max(0.0)
}

/// Absolutely continuous part of the density.
pub fn mp_density(x: f64, lambda: f64, scale: f64) -> f64 {
    let (a, b) = mp_edges(lambda, scale);
    if x <= a || x >= b || x <= 0.0 {
        return 0.0;
    }
    ((b - x) * (x - a)).sqrt() / (2.0 * std::f64::consts::PI * scale * lambda * x)
}

/// Stieltjes transform: the root of `s lambda z G^2 + (z - s(1 - lambda)) G + 1 = 0`
/// lying in the same half plane as `z`.
pub fn mp_stieltjes(z: Complex64, lambda: f64, scale: f64) -> Complex64 {
    let a = scale * lambda * z;
    let b = z - scale * (1.0 - lambda);
    let disc = (b * b - 4.0 * a).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    let r2 = (-b - disc) / (2.0 * a);
    let good = |r: Complex64| r.im * z.im > 0.0;
    match (good(r1), good(r2)) {
        (true, false) => r1,
        (false, true) => r2,
        _ => {
            let target = -1.0 / z;
            if (r1 - target).norm() <= (r2 - target).norm() {
                r1
            } else {
                r2
            }
        }
    }
}

/// The law as a [`SpectralDensity`] built from the closed form.
pub fn mp_law(lambda: f64, scale: f64, nodes: usize) -> Result<SpectralDensity> {
    if !(lambda > 0.0 && scale > 0.0) {
        return Err(Error::invalid("Marchenko–Pastur shape and scale must be positive"));
    }
    let (a, b) = mp_edges(lambda, scale);
    SpectralDensity::from_intervals(&[(a, b)], mp_atom(lambda), 0.0, nodes, |x| Ok(mp_density(x, lambda, scale)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_and_atoms() {
        let (a, b) = mp_edges(0.5, 1.0);
        assert!((a - (1.0 - 0.5f64.sqrt()).powi(2)).abs() < 1e-15);
        assert!((b - (1.0 + 0.5f64.sqrt()).powi(2)).abs() < 1e-15);
        assert_eq!(mp_atom(0.5), 0.0);
        assert!((mp_atom(2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ridge_point_of_shape_one() {
        // At z = -1 the transform is (sqrt(5) - 1) / 2.
        let g = mp_stieltjes(Complex64::new(-1.0, 1e-12), 1.0, 1.0);
        assert!((g.re - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn law_mass_and_mean() {
        for lambda in [0.5, 1.0, 2.0] {
            let d = mp_law(lambda, 1.3, 800).unwrap();
            assert!((d.total_mass_check - 1.0).abs() < 1e-6, "lambda {lambda}: {}", d.total_mass_check);
            assert!((d.first_moment - 1.3).abs() < 1e-6);
        }
    }

    #[test]
    fn density_is_imaginary_part_of_transform() {
        for &x in &[0.2, 1.0, 2.5] {
            let g = mp_stieltjes(Complex64::new(x, 1e-10), 0.5, 1.0);
            assert!((g.im / std::f64::consts::PI - mp_density(x, 0.5, 1.0)).abs() < 1e-8);
        }
    }
}
