//! Complex polynomials of small degree: evaluation, deflation of vanishing
//! leading terms and simultaneous root finding.
//!
//! Coefficients are stored in ascending order, `c[0] + c[1] x + ...`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Leading coefficients below this fraction of the coefficient norm are dropped.
pub const DEFLATION_RTOL: f64 = 1e-13;

/// Horner evaluation returning `(p(x), p'(x))`.
pub fn eval_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Drops leading coefficients that are negligible against the 2-norm of the
/// whole vector.
pub fn deflate(coeffs: &[Complex64]) -> &[Complex64] {
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut n = coeffs.len();
    while n > 1 && coeffs[n - 1].norm() <= DEFLATION_RTOL * norm {
        n -= 1;
    }
    &coeffs[..n]
}

/// All roots of the (already deflated) polynomial, by Aberth–Ehrlich
/// iteration followed by two Newton polishing steps per root.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    if lead.norm() == 0.0 || !lead.is_finite() {
        return Err(Error::Numerical("polynomial has a zero or non-finite leading coefficient".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("polynomial has non-finite coefficients".into()));
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    if degree == 1 {
        return Ok(vec![-monic[0]]);
    }

    // Fujiwara bound on root moduli, used to place starting points.
    let bound = (0..degree)
        .map(|k| {
            let c = monic[k].norm();
            if k == 0 {
                (c / 2.0).powf(1.0 / degree as f64)
            } else {
                c.powf(1.0 / (degree - k) as f64)
            }
        })
        .fold(0.0f64, f64::max)
        * 2.0;
    let radius = if bound > 0.0 { bound * 0.5 } else { 1.0 };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut converged = false;
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for k in 0..degree {
            let (p, dp) = eval_with_derivative(&monic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && z.iter().any(|r| !r.is_finite()) {
        return Err(Error::Numerical("root iteration diverged".into()));
    }

    for r in &mut z {
        polish(&monic, r);
    }
    Ok(z)
}

/// Newton steps that are kept only while they reduce `|p|`.
pub fn polish(coeffs: &[Complex64], root: &mut Complex64) {
    for _ in 0..2 {
        let (p, dp) = eval_with_derivative(coeffs, *root);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            return;
        }
        let candidate = *root - p / dp;
        if candidate.is_finite() && eval(coeffs, candidate).norm() <= p.norm() {
            *root = candidate;
        } else {
            return;
        }
    }
}

/// Product of linear factors, ascending coefficients. Used by tests.
pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Vec<Complex64> {
    let mut c = vec![lead];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        c = next;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matched(found: &[Complex64], expected: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; found.len()];
        expected.iter().all(|e| {
            let best = found
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|a, b| (a.1 - e).norm().total_cmp(&(b.1 - e).norm()));
            match best {
                Some((i, f)) if (f - e).norm() <= tol * (1.0 + e.norm()) => {
                    used[i] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn quartic_with_known_roots() {
        let rs = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.0, 0.7)];
        let coeffs = from_roots(&rs, c(2.0, -1.0));
        let found = roots(&coeffs).unwrap();
        assert!(matched(&found, &rs, 1e-12), "{found:?}");
    }

    #[test]
    fn deflation_drops_tiny_leading_terms() {
        let coeffs = [c(1.0, 0.0), c(-3.0, 0.0), c(2.0, 0.0), c(1e-20, 0.0), c(0.0, 0.0)];
        let d = deflate(&coeffs);
        assert_eq!(d.len(), 3);
        let found = roots(d).unwrap();
        assert!(matched(&found, &[c(1.0, 0.0), c(0.5, 0.0)], 1e-13));
    }

    #[test]
    fn linear_and_constant() {
        assert_eq!(roots(&[c(2.0, 0.0), c(4.0, 0.0)]).unwrap(), vec![c(-0.5, 0.0)]);
        assert!(roots(&[c(2.0, 0.0)]).unwrap().is_empty());
        assert!(roots(&[c(1.0, 0.0), c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn double_root_is_found() {
        let rs = [c(1.0, 1.0), c(1.0, 1.0), c(-2.0, 0.0)];
        let found = roots(&from_roots(&rs, c(1.0, 0.0))).unwrap();
        assert!(matched(&found, &rs, 1e-6));
    }

    proptest! {
        #[test]
        fn random_quartics(vals in proptest::collection::vec(-5.0f64..5.0, 8)) {
            let rs: Vec<Complex64> = vals.chunks(2).map(|p| c(p[0], p[1])).collect();
            let coeffs = from_roots(&rs, c(1.0, 0.0));
            let found = roots(&coeffs).unwrap();
            prop_assert_eq!(found.len(), 4);
            for r in &found {
                let scale: f64 = coeffs.iter().enumerate().map(|(k, a)| a.norm() * r.norm().powi(k as i32)).sum();
                prop_assert!(eval(&coeffs, *r).norm() <= 1e-11 * scale);
            }
        }
    }
}
