use num_rational::BigRational;

use super::table::{cached_count_table, CactusCountTable};
use crate::error::{Error, Result};
use crate::params::{RationalParams, SpectralParams};
use crate::Scalar;

/// `m_1, ..., m_Q` of a spectral law.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries<T> {
    values: Vec<T>,
}

impl<T> MomentSeries<T> {
    pub fn new(values: Vec<T>) -> Self {
        MomentSeries { values }
    }

    /// `m_q` for `1 <= q <= len()`.
    pub fn get(&self, q: usize) -> Option<&T> {
        q.checked_sub(1).and_then(|i| self.values.get(i))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

fn power<T: Scalar>(base: &T, exp: usize) -> T {
    num_traits::pow(base.clone(), exp)
}

/// `sum A(q, I_i, I_j, b) theta1^b theta2^(q-b) psi^(I_i+1-q) phi^(I_j)`.
pub fn moment_from_table<T: Scalar>(table: &CactusCountTable, theta1: &T, theta2: &T, phi: &T, psi: &T) -> T {
    let q = table.q;
    let inv_psi = T::one() / psi.clone();
    let mut acc = T::zero();
    for (&(ii, ij, b), &count) in &table.counts {
        let c = T::from_u64(count).expect("count fits the scalar type");
        // I_i + I_j < q, so the psi exponent is never positive
        let term = c
            * power(theta1, b)
            * power(theta2, q - b)
            * power(&inv_psi, q - 1 - ii)
            * power(phi, ij);
        acc = acc + term;
    }
    acc
}

/// Exact `q`-th limiting moment from the cactus enumeration.
pub fn moment(q: usize, params: &RationalParams) -> Result<BigRational> {
    let table = cached_count_table(q)?;
    Ok(moment_from_table(&table, &params.theta1, &params.theta2, &params.phi, &params.psi))
}

/// Floating-point [`moment`].
pub fn moment_f64(q: usize, params: &SpectralParams) -> Result<f64> {
    let table = cached_count_table(q)?;
    Ok(moment_from_table(&table, &params.theta1, &params.theta2, &params.phi, &params.psi))
}

pub fn moments(q_max: usize, params: &RationalParams) -> Result<MomentSeries<BigRational>> {
    Ok(MomentSeries::new((1..=q_max).map(|q| moment(q, params)).collect::<Result<_>>()?))
}

pub fn moments_f64(q_max: usize, params: &SpectralParams) -> Result<MomentSeries<f64>> {
    Ok(MomentSeries::new((1..=q_max).map(|q| moment_f64(q, params)).collect::<Result<_>>()?))
}

/// Narayana number `C(q, k) C(q-1, k) / (k + 1)`.
pub fn narayana(q: usize, k: usize) -> Result<u64> {
    if q == 0 || k >= q {
        return Err(Error::invalid(format!("narayana({q}, {k}) needs 0 <= k <= q - 1")));
    }
    let overflow = || Error::Capacity {
        what: "narayana number bits",
        requested: q,
        limit: 64,
    };
    let product = binomial(q, k)
        .checked_mul(binomial(q - 1, k))
        .ok_or_else(overflow)?;
    u64::try_from(product / (k as u128 + 1)).map_err(|_| overflow())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc = C(n, i + 1) afterwards
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `scale^q sum_k shape^k N(q, k)`: the `q`-th Marchenko–Pastur moment.
pub fn mp_moment<T: Scalar>(q: usize, shape: &T, scale: &T) -> Result<T> {
    if q == 0 {
        return Ok(T::one());
    }
    let mut acc = T::zero();
    for k in 0..q {
        let n = T::from_u64(narayana(q, k)?).expect("narayana fits the scalar type");
        acc = acc + n * power(shape, k);
    }
    Ok(acc * power(scale, q))
}

/// Marchenko–Pastur moment of shape `phi / prod(psi_p)` and unit scale:
/// the multilayer limit moment when `theta2 = 0`.
pub fn multilayer_mp_moment<T: Scalar>(q: usize, phi: &T, psi_list: &[T]) -> Result<T> {
    if psi_list.is_empty() {
        return Err(Error::invalid("psi list must not be empty"));
    }
    let mut shape = phi.clone();
    for p in psi_list {
        if p.is_zero() {
            return Err(Error::invalid("psi values must be non-zero"));
        }
        shape = shape / p.clone();
    }
    mp_moment(q, &shape, &T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{One, Zero};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_moment_is_theta1() {
        let p = RationalParams::from_ints((3, 2), (1, 3), (2, 5), (7, 4)).unwrap();
        assert_eq!(moment(1, &p).unwrap(), r(3, 2));
    }

    #[test]
    fn second_moment_formula() {
        let p = RationalParams::from_ints((3, 2), (1, 3), (2, 5), (7, 4)).unwrap();
        let (t1, t2, phi, psi) = (r(3, 2), r(1, 3), r(2, 5), r(7, 4));
        let expected = &t2 * &t2 / &psi + &t1 * &t1 + &t1 * &t1 * &phi / &psi;
        assert_eq!(moment(2, &p).unwrap(), expected);
    }

    #[test]
    fn catalan_from_mp_shape_one() {
        let p = RationalParams::from_ints((1, 1), (0, 1), (1, 1), (1, 1)).unwrap();
        assert_eq!(moment(3, &p).unwrap(), r(5, 1));
        assert_eq!(moment(4, &p).unwrap(), r(14, 1));
    }

    #[test]
    fn narayana_examples() {
        assert_eq!(narayana(3, 0).unwrap(), 1);
        assert_eq!(narayana(3, 1).unwrap(), 3);
        assert_eq!(narayana(4, 2).unwrap(), 6);
        assert!(narayana(3, 3).is_err());
        assert!(narayana(0, 0).is_err());
    }

    #[test]
    fn narayana_row_sums_are_catalan() {
        let catalan = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for q in 1..10 {
            let s: u64 = (0..q).map(|k| narayana(q, k).unwrap()).sum();
            assert_eq!(s, catalan[q]);
        }
    }

    #[test]
    fn mp_moment_examples() {
        let t = r(7, 3);
        assert_eq!(mp_moment(1, &r(5, 2), &t).unwrap(), t);
        let lam = r(3, 7);
        assert_eq!(mp_moment(2, &lam, &BigRational::one()).unwrap(), BigRational::one() + &lam);
        assert_eq!(mp_moment(4, &BigRational::one(), &BigRational::one()).unwrap(), r(14, 1));
        assert!(mp_moment(0, &BigRational::zero(), &BigRational::one()).unwrap().is_one());
    }

    #[test]
    fn multilayer_examples() {
        let one = BigRational::one();
        assert_eq!(
            multilayer_mp_moment(5, &r(3, 2), std::slice::from_ref(&r(1, 2))).unwrap(),
            mp_moment(5, &r(3, 1), &one).unwrap()
        );
        assert_eq!(multilayer_mp_moment(2, &one, &[one.clone(), one.clone()]).unwrap(), r(2, 1));
        assert_eq!(multilayer_mp_moment(3, &r(2, 1), &[one.clone(), r(2, 1)]).unwrap(), r(5, 1));
        assert!(multilayer_mp_moment::<f64>(2, &1.0, &[]).is_err());
    }

    #[test]
    fn f64_path_agrees_with_exact() {
        let p = RationalParams::from_ints((2, 1), (1, 2), (1, 2), (2, 1)).unwrap();
        for q in 1..=5 {
            let exact = crate::params::ratio_to_f64(&moment(q, &p).unwrap());
            let float = moment_f64(q, &p.to_f64()).unwrap();
            assert!((exact - float).abs() <= 1e-12 * exact.abs());
        }
    }
}
