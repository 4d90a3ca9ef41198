//! Moments from the expansion of the fixed-point equation at `z = infinity`.
//!
//! With `w = 1/z` and `s(w) = sum_q m_q w^q`, one has `-zG = 1 + s`,
//! `-G~/w = 1 + (phi/psi) s` and `P = z G G~ = w (1 + s)(1 + (phi/psi) s)`.
//! The cleared equation becomes
//!
//! `s (psi - theta2 P) - (theta1 - theta2) P (psi - theta2 P) - psi theta2 P = 0`,
//!
//! whose `w^q` coefficient is `psi m_q` plus terms in `m_1..m_{q-1}` only.

use num_rational::BigRational;

use crate::cactus::MomentSeries;
use crate::error::{Error, Result};
use crate::params::{RationalParams, SpectralParams};
use crate::Scalar;

/// Largest order the series solver accepts.
pub const SERIES_Q_MAX: usize = 12;

/// Truncated product of two series with constant terms at index 0.
fn mul<T: Scalar>(a: &[T], b: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

fn scale<T: Scalar>(a: &[T], c: &T) -> Vec<T> {
    a.iter().map(|x| x.clone() * c.clone()).collect()
}

fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

/// `w^order` coefficient of the cleared equation for the given partial series.
fn equation_coefficient<T: Scalar>(m: &[T], theta1: &T, theta2: &T, lambda: &T, psi: &T, order: usize) -> T {
    // s = sum m_q w^q, index 0 is the constant term
    let mut s = vec![T::zero(); order + 1];
    for (q, v) in m.iter().enumerate().take(order) {
        s[q + 1] = v.clone();
    }
    let mut one_plus_s = s.clone();
    one_plus_s[0] = T::one();
    let mut one_plus_ls = scale(&s, lambda);
    one_plus_ls[0] = T::one();
    let p_over_w = mul(&one_plus_s, &one_plus_ls, order);
    // P = w * p_over_w
    let mut p = vec![T::zero(); order + 1];
    p[1..].clone_from_slice(&p_over_w[..order]);
    // A = psi - theta2 P
    let mut a = scale(&p, &-theta2.clone());
    a[0] = a[0].clone() + psi.clone();

    let t1 = mul(&s, &a, order);
    let t2 = scale(&mul(&p, &a, order), &(theta1.clone() - theta2.clone()));
    let t3 = scale(&p, &(psi.clone() * theta2.clone()));
    let e = add(&t1, &scale(&add(&t2, &t3), &-T::one()));
    e[order].clone()
}

/// `m_1..m_Q` by solving the triangular system order by order. Exact for
/// rational scalars.
pub fn moments_generic<T: Scalar>(theta1: &T, theta2: &T, phi: &T, psi: &T, q_max: usize) -> Result<MomentSeries<T>> {
    if q_max > SERIES_Q_MAX {
        return Err(Error::Capacity {
            what: "series moment order",
            requested: q_max,
            limit: SERIES_Q_MAX,
        });
    }
    if psi.is_zero() {
        return Err(Error::invalid("psi must be non-zero"));
    }
    let lambda = phi.clone() / psi.clone();
    let mut m: Vec<T> = Vec::with_capacity(q_max);
    for q in 1..=q_max {
        m.push(T::zero());
        let rest = equation_coefficient(&m, theta1, theta2, &lambda, psi, q);
        m[q - 1] = -rest / psi.clone();
    }
    Ok(MomentSeries::new(m))
}

/// Exact moments for rational parameters.
pub fn moments_from_equation(params: &RationalParams, q_max: usize) -> Result<MomentSeries<BigRational>> {
    moments_generic(&params.theta1, &params.theta2, &params.phi, &params.psi, q_max)
}

pub fn moments_from_equation_f64(params: &SpectralParams, q_max: usize) -> Result<MomentSeries<f64>> {
    params.validate()?;
    moments_generic(&params.theta1, &params.theta2, &params.phi, &params.psi, q_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cactus::{moment, mp_moment};
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_two_moments() {
        let p = RationalParams::from_ints((3, 2), (1, 3), (2, 5), (7, 4)).unwrap();
        let m = moments_from_equation(&p, 2).unwrap();
        assert_eq!(m.get(1).unwrap(), &r(3, 2));
        let (t1, t2, phi, psi) = (r(3, 2), r(1, 3), r(2, 5), r(7, 4));
        assert_eq!(m.get(2).unwrap(), &(&t2 * &t2 / &psi + &t1 * &t1 * (r(1, 1) + &phi / &psi)));
    }

    #[test]
    fn marchenko_pastur_reduction() {
        let p = RationalParams::from_ints((5, 3), (0, 1), (3, 2), (1, 2)).unwrap();
        let m = moments_from_equation(&p, 8).unwrap();
        for q in 1..=8 {
            assert_eq!(m.get(q).unwrap(), &mp_moment(q, &r(3, 1), &r(5, 3)).unwrap());
        }
    }

    #[test]
    fn agrees_with_cactus_enumeration() {
        let p = RationalParams::from_ints((2, 1), (1, 2), (1, 2), (2, 1)).unwrap();
        let m = moments_from_equation(&p, 5).unwrap();
        for q in 1..=5 {
            assert_eq!(m.get(q).unwrap(), &moment(q, &p).unwrap(), "q = {q}");
        }
    }

    #[test]
    fn order_cap() {
        let p = SpectralParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(moments_from_equation_f64(&p, 13).is_err());
        assert_eq!(moments_from_equation_f64(&p, 12).unwrap().len(), 12);
    }
}
