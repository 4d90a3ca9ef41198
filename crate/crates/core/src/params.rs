use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::activation::ThetaParams;
use crate::error::{Error, Result};

/// The four numbers the limit law depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralParams {
    pub theta1: f64,
    pub theta2: f64,
    pub phi: f64,
    pub psi: f64,
}

impl SpectralParams {
    pub fn new(theta1: f64, theta2: f64, phi: f64, psi: f64) -> Result<Self> {
        let p = SpectralParams {
            theta1,
            theta2,
            phi,
            psi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_thetas(thetas: &ThetaParams, phi: f64, psi: f64) -> Result<Self> {
        Self::new(thetas.theta1, thetas.theta2, phi, psi)
    }

    /// Marchenko–Pastur shape `n1 / m` of the law in the `theta2 = 0` case.
    pub fn ratio(&self) -> f64 {
        self.phi / self.psi
    }

    /// Mass of the null eigenvalues forced by the rank bound when `n1 > m`.
    pub fn atom_at_zero(&self) -> f64 {
        (1.0 - self.psi / self.phi).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite();
        if !(ok(self.theta1) && self.theta1 > 0.0) {
            return Err(Error::invalid(format!("theta1 must be positive, got {}", self.theta1)));
        }
        if !(ok(self.theta2) && self.theta2 >= 0.0) {
            return Err(Error::invalid(format!("theta2 must be non-negative, got {}", self.theta2)));
        }
        if self.theta2 > self.theta1 * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "theta2 = {} exceeds theta1 = {}",
                self.theta2, self.theta1
            )));
        }
        if !(ok(self.phi) && self.phi > 0.0 && ok(self.psi) && self.psi > 0.0) {
            return Err(Error::invalid("phi and psi must be positive"));
        }
        Ok(())
    }
}

/// Exact rational version of [`SpectralParams`] for the verification path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalParams {
    pub theta1: BigRational,
    pub theta2: BigRational,
    pub phi: BigRational,
    pub psi: BigRational,
}

impl RationalParams {
    pub fn new(theta1: BigRational, theta2: BigRational, phi: BigRational, psi: BigRational) -> Result<Self> {
        if !theta1.is_positive() || theta2.is_negative() || !phi.is_positive() || !psi.is_positive() {
            return Err(Error::invalid("need theta1 > 0, theta2 >= 0, phi > 0, psi > 0"));
        }
        if theta2 > theta1 {
            return Err(Error::invalid(format!("theta2 = {theta2} exceeds theta1 = {theta1}")));
        }
        Ok(RationalParams {
            theta1,
            theta2,
            phi,
            psi,
        })
    }

    /// Parses four strings like `"1"`, `"1/2"` or `"0.25"`.
    pub fn parse(theta1: &str, theta2: &str, phi: &str, psi: &str) -> Result<Self> {
        Self::new(
            parse_rational(theta1)?,
            parse_rational(theta2)?,
            parse_rational(phi)?,
            parse_rational(psi)?,
        )
    }

    pub fn from_ints(theta1: (i64, i64), theta2: (i64, i64), phi: (i64, i64), psi: (i64, i64)) -> Result<Self> {
        let r = |(n, d): (i64, i64)| BigRational::new(BigInt::from(n), BigInt::from(d));
        Self::new(r(theta1), r(theta2), r(phi), r(psi))
    }

    pub fn to_f64(&self) -> SpectralParams {
        SpectralParams {
            theta1: ratio_to_f64(&self.theta1),
            theta2: ratio_to_f64(&self.theta2),
            phi: ratio_to_f64(&self.phi),
            psi: ratio_to_f64(&self.psi),
        }
    }
}

impl fmt::Display for RationalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "theta1={} theta2={} phi={} psi={}",
            self.theta1, self.theta2, self.phi, self.psi
        )
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Accepts integers, `a/b` fractions and finite decimals (converted exactly).
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::invalid(format!("cannot parse {text:?} as a rational"));
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(num, scale));
    }
    let n = BigInt::from_str(t).map_err(|_| bad())?;
    Ok(BigRational::new(n, BigInt::one()))
}
