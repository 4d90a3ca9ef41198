//! Activation functions and their Gaussian functionals.
//!
//! An [`ActivationSpec`] is a raw function `f` plus an additive center and a
//! multiplicative scale: `evaluate(x) = scale * (f(x) - center)`. The limit
//! spectrum depends on the activation only through
//!
//! * `theta1 = E[f(sZ)^2]`,
//! * `theta2 = (s E[f'(sZ)])^2`,
//!
//! where `s = sigma_w * sigma_x`. `theta3 = ((s^2 / 2) E[f''(sZ)])^2` is
//! reported as a diagnostic only.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::quadrature::{gaussian_expectation, piecewise_gaussian_expectation};

/// The raw function before centering and scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationKind {
    Linear,
    Tanh,
    /// `cos(x)`; becomes the shifted cosine once centered.
    Cos,
    /// `log(1 + exp(beta x)) / beta`.
    Softplus { beta: f64 },
    Monomial { k: u32 },
    /// `sum_k a_k x^k` for `k = 1..=K`; `coefficients[0]` is `a_1`.
    Polynomial { coefficients: Vec<f64> },
    Tabulated(MonotoneCubic),
    /// `max(x, 0)`. Outside the analytic class; only built when the caller
    /// opts into experimental activations.
    Relu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub center: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub sigma_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteProjection {
    /// `c_k = E[f(sZ) h_k(Z)]` with `h_k` the orthonormal probabilists' Hermite polynomials.
    pub coefficients: Vec<f64>,
    /// `E[f(sZ)^2] - sum_k c_k^2`, the energy above `max_order`.
    pub tail: f64,
    /// Set when the tail estimate exceeds `1e-6`.
    pub tail_warning: bool,
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind) -> Self {
        ActivationSpec {
            kind,
            center: 0.0,
            scale: 1.0,
        }
    }

    pub fn linear() -> Self {
        Self::new(ActivationKind::Linear)
    }

    pub fn tanh() -> Self {
        Self::new(ActivationKind::Tanh)
    }

    pub fn cos() -> Self {
        Self::new(ActivationKind::Cos)
    }

    pub fn softplus(beta: f64) -> Self {
        Self::new(ActivationKind::Softplus { beta })
    }

    pub fn monomial(k: u32) -> Self {
        Self::new(ActivationKind::Monomial { k })
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Self::new(ActivationKind::Polynomial { coefficients })
    }

    /// `x^3 - 3x`, the third probabilists' Hermite polynomial.
    pub fn hermite3() -> Self {
        Self::polynomial(vec![-3.0, 0.0, 1.0])
    }

    /// Looks up one of the named built-ins used on the command line.
    pub fn builtin(name: &str) -> Result<Self> {
        let spec = match name {
            "linear" => Self::linear(),
            "tanh" => Self::tanh(),
            "cos" | "shifted-cos" => Self::cos(),
            "softplus" | "smooth-relu" => Self::softplus(1.0),
            "hermite3" => Self::hermite3(),
            "relu" => Self::new(ActivationKind::Relu),
            other => {
                if let Some(k) = other.strip_prefix("monomial") {
                    let k: u32 = k
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad monomial degree in {other:?}")))?;
                    Self::monomial(k)
                } else {
                    return Err(Error::invalid(format!("unknown activation {other:?}")));
                }
            }
        };
        Ok(spec)
    }

    /// Whether the raw function is analytic, so Gauss–Hermite applies and
    /// closed-form derivatives exist.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.kind, ActivationKind::Tabulated(_) | ActivationKind::Relu)
    }

    /// Polynomial degree, when the activation is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match &self.kind {
            ActivationKind::Linear => Some(1),
            ActivationKind::Monomial { k } => Some(*k as usize),
            ActivationKind::Polynomial { coefficients } => Some(coefficients.len()),
            _ => None,
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.kind {
            ActivationKind::Linear => x,
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Cos => x.cos(),
            ActivationKind::Softplus { beta } => softplus(*beta, x),
            ActivationKind::Monomial { k } => x.powi(*k as i32),
            ActivationKind::Polynomial { coefficients } => {
                // Horner on a_K x^K + ... + a_1 x
                coefficients.iter().rev().fold(0.0, |acc, &a| acc * x + a) * x
            }
            ActivationKind::Tabulated(t) => t.value(x),
            ActivationKind::Relu => x.max(0.0),
        }
    }

    fn raw_d1(&self, x: f64) -> Option<f64> {
        Some(match &self.kind {
            ActivationKind::Linear => 1.0,
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::Cos => -x.sin(),
            ActivationKind::Softplus { beta } => logistic(beta * x),
            ActivationKind::Monomial { k } => match k {
                0 => 0.0,
                _ => *k as f64 * x.powi(*k as i32 - 1),
            },
            ActivationKind::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (i, &a)| acc * x + (i + 1) as f64 * a),
            ActivationKind::Tabulated(_) | ActivationKind::Relu => return None,
        })
    }

    fn raw_d2(&self, x: f64) -> Option<f64> {
        Some(match &self.kind {
            ActivationKind::Linear => 0.0,
            ActivationKind::Tanh => {
                let t = x.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            ActivationKind::Cos => -x.cos(),
            ActivationKind::Softplus { beta } => {
                let s = logistic(beta * x);
                beta * s * (1.0 - s)
            }
            ActivationKind::Monomial { k } => match k {
                0 | 1 => 0.0,
                _ => (*k as f64) * (*k as f64 - 1.0) * x.powi(*k as i32 - 2),
            },
            ActivationKind::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, &a)| acc * x + ((i + 1) * i) as f64 * a),
            ActivationKind::Tabulated(_) | ActivationKind::Relu => return None,
        })
    }

    /// Unchecked hot-path evaluation; may return a non-finite value.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * (self.raw(x) - self.center)
    }

    /// `scale * (f(x) - center)`, reporting overflow instead of returning infinities.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("activation argument {x} is not finite")));
        }
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { x })
        }
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.raw_d1(x).map(|d| self.scale * d)
    }

    pub fn second_derivative(&self, x: f64) -> Option<f64> {
        self.raw_d2(x).map(|d| self.scale * d)
    }

    /// Kinks of the raw function, in the `x` variable.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ActivationKind::Tabulated(t) => t.xs.clone(),
            ActivationKind::Relu => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// `E[g(sigma Z)]` with the quadrature suited to this activation.
    pub fn expectation<G: Fn(f64, f64) -> f64>(&self, sigma: f64, g: G) -> Result<f64> {
        // g receives (z, x = sigma z)
        if self.is_smooth() {
            // Singularities close to the real axis (sharp softplus at large
            // sigma) slow Gauss–Hermite down; panels handle those.
            match gaussian_expectation(|z| g(z, sigma * z)) {
                Err(Error::Quadrature { .. }) => piecewise_gaussian_expectation(|z| g(z, sigma * z), &[]),
                other => other,
            }
        } else {
            let cuts: Vec<f64> = self.breakpoints().iter().map(|b| b / sigma).collect();
            piecewise_gaussian_expectation(|z| g(z, sigma * z), &cuts)
        }
    }

    /// Returns a copy whose center makes `E[f(sigma Z)] = 0`.
    pub fn center_gaussian(&self, sigma: f64) -> Result<ActivationSpec> {
        check_sigma(sigma)?;
        let mean_raw = self.expectation(sigma, |_, x| self.raw(x))?;
        Ok(ActivationSpec {
            center: mean_raw,
            ..self.clone()
        })
    }

    /// Returns a copy rescaled so that `theta1 = 1` at this `sigma`.
    pub fn normalize_theta1(&self, sigma: f64) -> Result<ActivationSpec> {
        check_sigma(sigma)?;
        let theta1 = self.expectation(sigma, |_, x| self.eval(x).powi(2))?;
        if !(theta1 > 0.0) {
            return Err(Error::invalid("cannot normalize an activation with theta1 = 0"));
        }
        Ok(ActivationSpec {
            scale: self.scale / theta1.sqrt(),
            ..self.clone()
        })
    }

    /// Gaussian functionals at `s = sigma_w * sigma_x`. Non-smooth activations
    /// use the Stein identities `s E[f'(sZ)] = E[Z f(sZ)]` and
    /// `s^2 E[f''(sZ)] = E[(Z^2 - 1) f(sZ)]`.
    pub fn compute_thetas(&self, sigma_w: f64, sigma_x: f64) -> Result<ThetaParams> {
        let s = sigma_w * sigma_x;
        check_sigma(s)?;
        let theta1 = self.expectation(s, |_, x| self.eval(x).powi(2))?;
        let (d1, d2) = if self.is_smooth() {
            let d1 = s * self.expectation(s, |_, x| self.derivative(x).unwrap_or(f64::NAN))?;
            let d2 = 0.5
                * s
                * s
                * self.expectation(s, |_, x| self.second_derivative(x).unwrap_or(f64::NAN))?;
            (d1, d2)
        } else {
            let d1 = self.expectation(s, |z, x| z * self.eval(x))?;
            let d2 = 0.5 * self.expectation(s, |z, x| (z * z - 1.0) * self.eval(x))?;
            (d1, d2)
        };
        Ok(ThetaParams {
            theta1,
            theta2: d1 * d1,
            theta3: d2 * d2,
            sigma_product: s,
        })
    }

    /// Coefficients of `f(sigma .)` in the orthonormal Hermite basis up to `max_order`.
    pub fn hermite_projection(&self, sigma: f64, max_order: usize) -> Result<HermiteProjection> {
        check_sigma(sigma)?;
        let mut coefficients = Vec::with_capacity(max_order + 1);
        for k in 0..=max_order {
            coefficients.push(self.expectation(sigma, |z, x| self.eval(x) * hermite_orthonormal(k, z))?);
        }
        let energy = self.expectation(sigma, |_, x| self.eval(x).powi(2))?;
        let captured: f64 = coefficients.iter().map(|c| c * c).sum();
        let tail = (energy - captured).max(0.0);
        Ok(HermiteProjection {
            coefficients,
            tail,
            tail_warning: tail > 1e-6,
        })
    }

    /// Applies the activation to every element, failing on the first overflow.
    pub fn apply_in_place(&self, values: &mut [f64]) -> Result<()> {
        for v in values.iter_mut() {
            let x = *v;
            *v = self.eval(x);
            if !v.is_finite() {
                return Err(Error::Overflow { x });
            }
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("scale parameter must be positive, got {sigma}")))
    }
}

fn softplus(beta: f64, x: f64) -> f64 {
    let t = beta * x;
    if t > 0.0 {
        x + (-t).exp().ln_1p() / beta
    } else {
        t.exp().ln_1p() / beta
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `He_k(z) / sqrt(k!)`.
pub fn hermite_orthonormal(k: usize, z: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let next = (z * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes, so
/// monotone data stays monotone. Constant outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::invalid("tabulated activation needs matching x/y with at least 2 points"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tabulated activation contains non-finite values"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("tabulated x values must be strictly increasing"));
        }
        let n = xs.len();
        let delta: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                (delta[i - 1] + delta[i]) / 2.0
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / delta[i];
            let b = slopes[i + 1] / delta[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slopes[i] = t * a * delta[i];
                slopes[i + 1] = t * b * delta[i];
            }
        }
        Ok(MonotoneCubic { xs, ys, slopes })
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn default_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// JSON form: `{"kind": ..., "params": ..., "scale": ..., "auto_center": true}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivationConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_true")]
    pub auto_center: bool,
    /// Rescale after centering so that `theta1 = 1`.
    #[serde(default)]
    pub normalize_theta1: bool,
    /// Required to build the non-analytic `relu`.
    #[serde(default)]
    pub experimental: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SoftplusParams {
    #[serde(default = "default_scale")]
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialParams {
    k: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialParams {
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl ActivationConfig {
    pub fn named(kind: &str) -> Self {
        ActivationConfig {
            kind: kind.to_string(),
            params: None,
            scale: 1.0,
            auto_center: true,
            normalize_theta1: false,
            experimental: false,
        }
    }

    fn params<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        let value = self.params.clone().unwrap_or(Value::Object(Default::default()));
        serde_json::from_value(value)
            .map_err(|e| Error::invalid(format!("bad params for activation {:?}: {e}", self.kind)))
    }

    fn no_params(&self) -> Result<()> {
        match &self.params {
            None => Ok(()),
            Some(Value::Object(m)) if m.is_empty() => Ok(()),
            Some(Value::Null) => Ok(()),
            Some(_) => Err(Error::invalid(format!("activation {:?} takes no params", self.kind))),
        }
    }

    /// Builds the [`ActivationSpec`], centering and normalizing at `sigma = sigma_w * sigma_x`
    /// when requested.
    pub fn build(&self, sigma: f64) -> Result<ActivationSpec> {
        if !(self.scale.is_finite() && self.scale != 0.0) {
            return Err(Error::invalid("activation scale must be finite and non-zero"));
        }
        let kind = match self.kind.as_str() {
            "linear" => {
                self.no_params()?;
                ActivationKind::Linear
            }
            "tanh" => {
                self.no_params()?;
                ActivationKind::Tanh
            }
            "cos" | "shifted-cos" => {
                self.no_params()?;
                ActivationKind::Cos
            }
            "hermite3" => {
                self.no_params()?;
                ActivationKind::Polynomial {
                    coefficients: vec![-3.0, 0.0, 1.0],
                }
            }
            "softplus" | "smooth-relu" => {
                let p: SoftplusParams = self.params()?;
                if !(p.beta.is_finite() && p.beta > 0.0) {
                    return Err(Error::invalid("softplus beta must be positive"));
                }
                ActivationKind::Softplus { beta: p.beta }
            }
            "monomial" => {
                let p: MonomialParams = self.params()?;
                if p.k == 0 {
                    return Err(Error::invalid("monomial degree must be at least 1"));
                }
                ActivationKind::Monomial { k: p.k }
            }
            "polynomial" => {
                let p: PolynomialParams = self.params()?;
                if p.coefficients.is_empty() || p.coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("polynomial needs finite coefficients a_1..a_K"));
                }
                ActivationKind::Polynomial {
                    coefficients: p.coefficients,
                }
            }
            "tabulated" => {
                let p: TableParams = self.params()?;
                ActivationKind::Tabulated(MonotoneCubic::new(p.x, p.y)?)
            }
            "relu" => {
                self.no_params()?;
                if !self.experimental {
                    return Err(Error::invalid(
                        "relu is outside the analytic class; set \"experimental\": true to use it",
                    ));
                }
                ActivationKind::Relu
            }
            other => return Err(Error::invalid(format!("unknown activation kind {other:?}"))),
        };
        let mut spec = ActivationSpec {
            kind,
            center: 0.0,
            scale: self.scale,
        };
        if self.auto_center {
            spec = spec.center_gaussian(sigma)?;
        }
        if self.normalize_theta1 {
            spec = spec.normalize_theta1(sigma)?;
        }
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn centered(f: ActivationSpec, sigma: f64) -> ActivationSpec {
        f.center_gaussian(sigma).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(ActivationSpec::linear().evaluate(2.0).unwrap(), 2.0);
        let c = centered(ActivationSpec::cos(), 1.0);
        assert_abs_diff_eq!(c.evaluate(0.0).unwrap(), 1.0 - (-0.5f64).exp(), epsilon = 1e-14);
        let m = centered(ActivationSpec::monomial(3), 1.0);
        assert_abs_diff_eq!(m.center, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.evaluate(1.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn evaluate_is_deterministic() {
        let f = centered(ActivationSpec::softplus(2.0), 1.3);
        for x in [-3.0, -0.1, 0.0, 0.7, 5.5] {
            assert_eq!(f.evaluate(x).unwrap().to_bits(), f.evaluate(x).unwrap().to_bits());
        }
    }

    #[test]
    fn monomial_overflow_is_reported() {
        let f = ActivationSpec::monomial(200);
        assert!(matches!(f.evaluate(1e10), Err(Error::Overflow { .. })));
        assert!(f.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn center_examples() {
        let c = centered(ActivationSpec::cos(), 1.0);
        assert_abs_diff_eq!(c.center, (-0.5f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(centered(ActivationSpec::monomial(3), 1.0).center, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn centering_is_idempotent_and_zero_mean() {
        for f in [
            ActivationSpec::cos(),
            ActivationSpec::softplus(1.0),
            ActivationSpec::monomial(4),
            ActivationSpec::polynomial(vec![0.5, 1.0, -0.2]),
        ] {
            for sigma in [0.5, 1.0, 2.0] {
                let once = centered(f.clone(), sigma);
                let twice = centered(once.clone(), sigma);
                assert!((once.center - twice.center).abs() < 1e-12);
                let mean = once.expectation(sigma, |_, x| once.eval(x)).unwrap();
                assert!(mean.abs() < 1e-10, "{f:?} sigma={sigma} mean={mean}");
            }
        }
    }

    #[test]
    fn theta_examples() {
        let t = ActivationSpec::linear().compute_thetas(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(t.theta1, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(t.theta2, 1.0, epsilon = 1e-13);

        let h = centered(ActivationSpec::hermite3(), 1.0).compute_thetas(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(h.theta2, 0.0, epsilon = 1e-20);
        // E(Z^3 - 3Z)^2 = 15 - 18 + 9
        assert_abs_diff_eq!(h.theta1, 6.0, epsilon = 1e-11);

        let c = centered(ActivationSpec::cos(), 1.0).compute_thetas(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(c.theta2, 0.0, epsilon = 1e-20);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(c.theta1, (1.0 + e.powi(-2)) / 2.0 - 1.0 / e, epsilon = 1e-13);
    }

    #[test]
    fn sigma_product_enters_thetas() {
        // linear at s: theta1 = s^2, theta2 = s^2
        let t = ActivationSpec::linear().compute_thetas(2.0, 0.75).unwrap();
        assert_abs_diff_eq!(t.theta1, 2.25, epsilon = 1e-12);
        assert_abs_diff_eq!(t.theta2, 2.25, epsilon = 1e-12);
        assert_abs_diff_eq!(t.sigma_product, 1.5);
    }

    #[test]
    fn hermite_projection_examples() {
        let p = ActivationSpec::linear().hermite_projection(1.0, 8).unwrap();
        assert_abs_diff_eq!(p.coefficients[1], 1.0, epsilon = 1e-13);
        for (k, c) in p.coefficients.iter().enumerate() {
            if k != 1 {
                assert!(c.abs() < 1e-13);
            }
        }
        let h = centered(ActivationSpec::hermite3(), 1.0).hermite_projection(1.0, 8).unwrap();
        assert_abs_diff_eq!(h.coefficients[3], 6f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(h.coefficients[1], 0.0, epsilon = 1e-12);
        let sum: f64 = h.coefficients.iter().map(|c| c * c).sum();
        assert_abs_diff_eq!(sum, 6.0, epsilon = 1e-10);
        assert!(!h.tail_warning);

        let t = ActivationSpec::tanh();
        let proj = t.hermite_projection(1.0, 3).unwrap();
        let th = t.compute_thetas(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(proj.coefficients[1].powi(2), th.theta2, epsilon = 1e-10);
    }

    #[test]
    fn builtin_theta_inequalities_and_stein() {
        let builtins = [
            ActivationSpec::linear(),
            ActivationSpec::tanh(),
            ActivationSpec::cos(),
            ActivationSpec::softplus(1.0),
            ActivationSpec::softplus(4.0),
            ActivationSpec::monomial(2),
            ActivationSpec::monomial(3),
            ActivationSpec::hermite3(),
        ];
        for f in builtins {
            for sigma in [0.5, 1.0, 2.0] {
                let f = centered(f.clone(), sigma);
                let th = f.compute_thetas(sigma, 1.0).unwrap();
                let proj = f.hermite_projection(sigma, 1).unwrap();
                let c1sq = proj.coefficients[1].powi(2);
                assert!(th.theta1 * (1.0 + 1e-13) >= th.theta2 && th.theta2 >= 0.0, "{f:?}");
                assert!(th.theta1 + 1e-12 >= c1sq);
                assert!((th.theta2 - c1sq).abs() < 1e-8, "{f:?} {sigma}: {} vs {c1sq}", th.theta2);
                let lhs = sigma * f.expectation(sigma, |_, x| f.derivative(x).unwrap()).unwrap();
                let rhs = f.expectation(sigma, |z, x| z * f.eval(x)).unwrap();
                assert!((lhs - rhs).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn parity_kills_thetas() {
        for sigma in [0.5, 1.0, 2.0] {
            let odd = ActivationSpec::tanh().compute_thetas(sigma, 1.0).unwrap();
            assert!(odd.theta3 < 1e-20);
            let even = centered(ActivationSpec::cos(), sigma).compute_thetas(sigma, 1.0).unwrap();
            assert!(even.theta2 < 1e-20);
            let even4 = centered(ActivationSpec::monomial(4), sigma)
                .compute_thetas(sigma, 1.0)
                .unwrap();
            assert!(even4.theta2 < 1e-20);
        }
    }

    #[test]
    fn tabulated_uses_stein_route() {
        // A dense table of tanh reproduces tanh's thetas closely.
        let xs: Vec<f64> = (0..=480).map(|i| -12.0 + 0.05 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.tanh()).collect();
        let cfg = ActivationConfig {
            params: Some(serde_json::json!({"x": xs, "y": ys})),
            ..ActivationConfig::named("tabulated")
        };
        let tab = cfg.build(1.0).unwrap();
        assert!(!tab.is_smooth());
        let a = tab.compute_thetas(1.0, 1.0).unwrap();
        let b = ActivationSpec::tanh().compute_thetas(1.0, 1.0).unwrap();
        assert!((a.theta1 - b.theta1).abs() < 1e-5);
        assert!((a.theta2 - b.theta2).abs() < 1e-5);
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity() {
        let t = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.1, 5.0, 5.1]).unwrap();
        let mut last = f64::NEG_INFINITY;
        for i in 0..=300 {
            let v = t.value(i as f64 / 100.0);
            assert!(v >= last - 1e-15);
            last = v;
        }
        assert_eq!(t.value(-1.0), 0.0);
        assert_eq!(t.value(4.0), 5.1);
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let cfg = ActivationConfig::from_json(
            r#"{"kind": "softplus", "params": {"beta": 2.0}, "scale": 1.5, "auto_center": true}"#,
        )
        .unwrap();
        let f = cfg.build(1.0).unwrap();
        assert_eq!(f.kind, ActivationKind::Softplus { beta: 2.0 });
        assert_eq!(f.scale, 1.5);
        assert!(f.center > 0.0);

        assert!(ActivationConfig::from_json(r#"{"kind": "tanh", "bogus": 1}"#).is_err());
        assert!(ActivationConfig::named("relu").build(1.0).is_err());
        let relu = ActivationConfig {
            experimental: true,
            ..ActivationConfig::named("relu")
        };
        let r = relu.build(1.0).unwrap();
        let th = r.compute_thetas(1.0, 1.0).unwrap();
        // E[Z max(Z,0)] = 1/2
        assert_abs_diff_eq!(th.theta2, 0.25, epsilon = 1e-12);
        assert!(ActivationConfig::named("sigmoid").build(1.0).is_err());
    }

    #[test]
    fn normalize_theta1_gives_unit_theta1() {
        let cfg = ActivationConfig {
            normalize_theta1: true,
            ..ActivationConfig::named("hermite3")
        };
        let f = cfg.build(1.0).unwrap();
        let th = f.compute_thetas(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(th.theta1, 1.0, epsilon = 1e-12);
    }
}
