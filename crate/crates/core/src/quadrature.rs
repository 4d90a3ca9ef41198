//! Gaussian expectations `E[g(Z)]`, `Z ~ N(0, 1)`.
//!
//! Smooth integrands go through Gauss–Hermite rules of increasing order
//! (63, 127, ..., 1023 points) until two successive orders agree. Integrands
//! with kinks or piecewise definitions use composite Gauss–Legendre panels on
//! `[-12, 12]` split at the supplied breakpoints.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Orders tried by [`gaussian_expectation`], each one `2n + 1` of the last.
pub const HERMITE_ORDERS: [usize; 5] = [63, 127, 255, 511, 1023];

/// Relative agreement required between successive refinements.
pub const QUADRATURE_RTOL: f64 = 1e-12;

/// Half-width of the truncated domain for piecewise integration. The
/// Gaussian mass beyond it is below 1e-32.
pub const TRUNCATION: f64 = 12.0;

/// Nodes and weights for the standard normal weight; weights sum to one.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `n`-point rule from the Jacobi matrix of the probabilists'
    /// Hermite polynomials (zero diagonal, off-diagonal `sqrt(k)`). Nodes are
    /// its eigenvalues, located by Sturm-count bisection; weights are the
    /// Christoffel numbers `1 / sum_k p_k(x)^2` over the orthonormal family,
    /// accumulated in log scale. Weights below the smallest normal double are
    /// dropped.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        // Gershgorin bound on the spectrum.
        let bound = if n == 1 { 1.0 } else { 2.0 * ((n - 1) as f64).sqrt() + 1.0 };
        let half = n / 2;
        let mut upper = Vec::with_capacity(n.div_ceil(2));
        if n % 2 == 1 {
            upper.push(0.0);
        }
        // The k-th largest eigenvalue, k = 1..half, is the point where the
        // count of eigenvalues below x reaches n - k.
        for k in (1..=half).rev() {
            let target = n - k;
            let (mut lo, mut hi) = (0.0f64, bound);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(n, mid) <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            upper.push(0.5 * (lo + hi));
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut lower_nodes = Vec::new();
        let mut lower_weights = Vec::new();
        for &x in &upper {
            let w = (-log_christoffel_sum(n, x)).exp();
            if w <= f64::MIN_POSITIVE {
                continue;
            }
            if x > 0.0 {
                lower_nodes.push(-x);
                lower_weights.push(w);
            }
            nodes.push(x);
            weights.push(w);
        }
        lower_nodes.reverse();
        lower_weights.reverse();
        lower_nodes.extend(nodes);
        lower_weights.extend(weights);
        let (nodes, mut weights) = (lower_nodes, lower_weights);
        // Re-normalize away the last few ulps of drift.
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        GaussHermite { nodes, weights }
    }

    /// Cached rule for one of [`HERMITE_ORDERS`].
    pub fn cached(order_index: usize) -> &'static GaussHermite {
        static RULES: [OnceLock<GaussHermite>; 5] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        RULES[order_index].get_or_init(|| GaussHermite::new(HERMITE_ORDERS[order_index]))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Returns `(sum w g, sum w |g|)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> (f64, f64) {
        let mut acc = 0.0;
        let mut abs = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = w * g(x);
            acc += v;
            abs += v.abs();
        }
        (acc, abs)
    }
}

// Number of Jacobi-matrix eigenvalues strictly below `x`.
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut d = -x;
    for k in 0..n {
        if k > 0 {
            d = -x - k as f64 / d;
        }
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + x.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

// log of sum_{k<n} p_k(x)^2 for the orthonormal probabilists' Hermite family.
fn log_christoffel_sum(n: usize, x: f64) -> f64 {
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let mut sum = 1.0f64;
    let mut log_scale = 0.0f64;
    for k in 0..n.saturating_sub(1) {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        sum += cur * cur;
        if sum > 1e200 {
            prev *= 1e-100;
            cur *= 1e-100;
            sum *= 1e-200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    sum.ln() + log_scale
}

/// `E[g(Z)]` by Gauss–Hermite order doubling.
///
/// Fails with [`Error::Quadrature`] when the 511- and 1023-point values still
/// differ by more than [`QUADRATURE_RTOL`] relative to `E|g(Z)|`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(g: F) -> Result<f64> {
    let (mut prev, _) = GaussHermite::cached(0).integrate(&g);
    let mut change = f64::INFINITY;
    for k in 1..HERMITE_ORDERS.len() {
        let (cur, abs) = GaussHermite::cached(k).integrate(&g);
        if !cur.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite Gaussian integrand at {} points",
                HERMITE_ORDERS[k]
            )));
        }
        change = (cur - prev).abs() / abs.max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= QUADRATURE_RTOL * abs || abs == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        change,
        points: HERMITE_ORDERS[HERMITE_ORDERS.len() - 1],
    })
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// `int_a^b g(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, g: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// `E[g(Z)]` for integrands that are smooth only between `breakpoints`
/// (given in the standard normal variable). Panels are halved until the
/// result is stable to [`QUADRATURE_RTOL`].
pub fn piecewise_gaussian_expectation<F: Fn(f64) -> f64>(
    g: F,
    breakpoints: &[f64],
) -> Result<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && b.abs() < TRUNCATION)
        .collect();
    cuts.push(-TRUNCATION);
    cuts.push(TRUNCATION);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let density = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let rule = legendre16();
    let eval = |panels: usize| -> (f64, f64) {
        let mut acc = 0.0;
        let mut abs = 0.0;
        for piece in cuts.windows(2) {
            let h = (piece[1] - piece[0]) / panels as f64;
            for p in 0..panels {
                let a = piece[0] + h * p as f64;
                acc += rule.integrate(a, a + h, |z| g(z) * density(z));
                abs += rule.integrate(a, a + h, |z| (g(z) * density(z)).abs());
            }
        }
        (acc, abs)
    };

    let (mut prev, _) = eval(4);
    let mut change = f64::INFINITY;
    let mut panels = 8;
    while panels <= 1024 {
        let (cur, abs) = eval(panels);
        change = (cur - prev).abs() / abs.max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= QUADRATURE_RTOL * abs || abs == 0.0 {
            return Ok(cur);
        }
        prev = cur;
        panels *= 2;
    }
    Err(Error::Quadrature {
        change,
        points: 16 * 1024 * (cuts.len() - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_rules_integrate_gaussian_moments() {
        for k in 0..HERMITE_ORDERS.len() {
            let rule = GaussHermite::cached(k);
            let (m0, _) = rule.integrate(|_| 1.0);
            let (m2, _) = rule.integrate(|x| x * x);
            let (m4, _) = rule.integrate(|x| x.powi(4));
            let (m6, _) = rule.integrate(|x| x.powi(6));
            assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-11);
            assert_abs_diff_eq!(m6, 15.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn large_rule_nodes_are_symmetric_and_sorted() {
        let rule = GaussHermite::cached(4);
        let n = rule.nodes().len();
        assert!(n > 500);
        for i in 0..n {
            assert_abs_diff_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i], epsilon = 1e-12);
        }
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn expectation_of_cosine() {
        let v = gaussian_expectation(f64::cos).unwrap();
        assert_abs_diff_eq!(v, (-0.5f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn piecewise_handles_kink() {
        // E[max(Z, 0)] = 1/sqrt(2 pi)
        let v = piecewise_gaussian_expectation(|z| z.max(0.0), &[0.0]).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(16);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(7));
        assert_abs_diff_eq!(v, 2f64.powi(8) / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn nonconvergent_integrand_is_reported() {
        // Discontinuous integrand: Gauss-Hermite never settles to 1e-12.
        let err = gaussian_expectation(|z| if z > 0.3 { 1.0 } else { 0.0 }).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
