use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::equation::track_root_with;
use super::series::moments_from_equation_f64;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, schema_line};
use crate::params::SpectralParams;

/// Grid and inversion settings for [`density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConfig {
    /// Uniform points used to locate the support.
    pub scan_points: usize,
    /// Quadrature nodes per support interval; these are the output grid.
    pub nodes_per_interval: usize,
    /// Imaginary offset; by default `1e-8` times the support scale.
    pub eta: Option<f64>,
    /// Density level below which a point is outside the support.
    pub threshold: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            scan_points: 1500,
            nodes_per_interval: 600,
            eta: None,
            threshold: 1e-6,
        }
    }
}

/// A law made of an atom at zero plus a density on finitely many intervals.
///
/// `grid` holds Chebyshev-clustered nodes on each interval, `weights` the
/// matching quadrature weights, so `sum weights * rho` is the continuous mass.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub weights: Vec<f64>,
    pub eta: f64,
    pub atom_at_zero: f64,
    pub support: Vec<(f64, f64)>,
    /// `atom + integral of rho`.
    pub total_mass_check: f64,
    pub first_moment: f64,
    #[serde(skip)]
    knots: Vec<(f64, f64)>,
}

impl SpectralDensity {
    /// Tabulates `rho` on each interval with `nodes` points
    /// `x = a + (b - a)(1 - cos t)/2`, `t_k = pi (k + 1/2) / nodes`. The
    /// midpoint rule in `t` is spectrally accurate for square-root and
    /// inverse-square-root edge behaviour.
    pub fn from_intervals<F>(intervals: &[(f64, f64)], atom: f64, eta: f64, nodes: usize, rho: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        if nodes < 2 {
            return Err(Error::invalid("need at least two nodes per interval"));
        }
        let mut grid = Vec::with_capacity(intervals.len() * nodes);
        let mut weights = Vec::with_capacity(grid.capacity());
        for &(a, b) in intervals {
            if !(b > a) {
                return Err(Error::invalid(format!("empty support interval [{a}, {b}]")));
            }
            for k in 0..nodes {
                let t = PI * (k as f64 + 0.5) / nodes as f64;
                grid.push(a + (b - a) * (1.0 - t.cos()) / 2.0);
                weights.push(PI / nodes as f64 * (b - a) / 2.0 * t.sin());
            }
        }
        let rho: Vec<f64> = grid.par_iter().map(|&x| rho(x).map(|r| r.max(0.0))).collect::<Result<_>>()?;

        let mut knots = Vec::with_capacity(grid.len() + 2 * intervals.len());
        let mut acc = atom;
        let mut first_moment = 0.0;
        for (i, &(a, b)) in intervals.iter().enumerate() {
            knots.push((a, acc));
            for k in i * nodes..(i + 1) * nodes {
                let piece = weights[k] * rho[k];
                knots.push((grid[k], acc + 0.5 * piece));
                acc += piece;
                first_moment += piece * grid[k];
            }
            knots.push((b, acc));
        }
        Ok(SpectralDensity {
            grid,
            rho,
            weights,
            eta,
            atom_at_zero: atom,
            support: intervals.to_vec(),
            total_mass_check: acc,
            first_moment,
            knots,
        })
    }

    /// `atom * 0^q + integral x^q rho`.
    pub fn moment(&self, q: u32) -> f64 {
        let atom = if q == 0 { self.atom_at_zero } else { 0.0 };
        atom + self
            .grid
            .iter()
            .zip(&self.weights)
            .zip(&self.rho)
            .map(|((x, w), r)| w * r * x.powi(q as i32))
            .sum::<f64>()
    }

    /// Smallest interval containing the support and the atom, if any.
    pub fn hull(&self) -> (f64, f64) {
        let lo = self.support.first().map_or(0.0, |s| s.0);
        let hi = self.support.last().map_or(0.0, |s| s.1);
        if self.atom_at_zero > 0.0 {
            (lo.min(0.0), hi.max(0.0))
        } else {
            (lo, hi)
        }
    }

    /// Right-continuous distribution function, clamped to `[0, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.continuous_cdf(x).clamp(0.0, 1.0)
    }

    /// `lim_{y -> x-} cdf(y)`; differs from [`cdf`](Self::cdf) only at the atom.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if x == 0.0 { self.continuous_cdf(0.0) - self.atom_at_zero } else { 0.0 }.clamp(0.0, 1.0);
        }
        self.cdf(x)
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        let k = &self.knots;
        if k.is_empty() {
            return self.atom_at_zero;
        }
        if x <= k[0].0 {
            return self.atom_at_zero;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= x);
        let (x0, c0) = k[i - 1];
        let (x1, c1) = k[i];
        if x1 == x0 {
            c1
        } else {
            c0 + (c1 - c0) * (x - x0) / (x1 - x0)
        }
    }

    /// Generalized inverse of the distribution function.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u <= self.atom_at_zero || self.knots.is_empty() {
            return 0.0;
        }
        let k = &self.knots;
        let i = k.partition_point(|p| p.1 < u);
        if i == 0 {
            return k[0].0;
        }
        if i >= k.len() {
            return k[k.len() - 1].0;
        }
        let (x0, c0) = k[i - 1];
        let (x1, c1) = k[i];
        if c1 == c0 {
            x1
        } else {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        }
    }

    /// Largest `|rho - reference|` over grid points at least `margin` from
    /// every support edge.
    pub fn sup_distance<F: Fn(f64) -> f64>(&self, reference: F, margin: f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.rho)
            .filter(|(&x, _)| self.support.iter().all(|&(a, b)| (x - a).abs() >= margin && (x - b).abs() >= margin))
            .map(|(&x, &r)| (r - reference(x)).abs())
            .fold(0.0, f64::max)
    }

    /// `x,rho` rows preceded by the schema comment.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{}", schema_line())?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "rho"])?;
        for (&x, &r) in self.grid.iter().zip(&self.rho) {
            w.write_record([fmt_f64(x), fmt_f64(r)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Metadata written next to the CSV.
    pub fn sidecar(&self, params: Value) -> Value {
        let (a, b) = self.hull();
        json!({
            "schema": crate::SCHEMA_VERSION,
            "support": [a, b],
            "intervals": self.support,
            "atom": self.atom_at_zero,
            "eta": self.eta,
            "total_mass": self.total_mass_check,
            "first_moment": self.first_moment,
            "params": params,
        })
    }
}

/// `Im G(x + i eta) / pi` with the Poisson-smoothed atom at zero removed.
fn smoothed_rho(x: f64, eta: f64, params: &SpectralParams, atom: f64, ratio: f64) -> Result<(f64, Complex64)> {
    let (g, _) = track_root_with(Complex64::new(x, eta), params, ratio)?;
    let atom_part = atom * eta / (PI * (x * x + eta * eta));
    Ok((g.im / PI - atom_part, g))
}

/// Two-point Richardson extrapolation `2 rho_eta - rho_{2 eta}`.
fn inverted_rho(x: f64, eta: f64, params: &SpectralParams, atom: f64, ratio: f64) -> Result<(f64, Complex64)> {
    let (r1, g) = smoothed_rho(x, eta, params, atom, ratio)?;
    let (r2, _) = smoothed_rho(x, 2.0 * eta, params, atom, ratio)?;
    Ok(((2.0 * r1 - r2).max(0.0), g))
}

/// Continuation ratio used for the main sweep and for re-solving jumps.
const RATIO: f64 = 0.7;
const FINE_RATIO: f64 = 0.95;

/// Limiting density by Stieltjes inversion of the fixed-point solution.
pub fn density(params: &SpectralParams, config: &DensityConfig) -> Result<SpectralDensity> {
    params.validate()?;
    if config.scan_points < 8 {
        return Err(Error::invalid("scan_points must be at least 8"));
    }
    let atom = params.atom_at_zero();
    // m_{q+1}/m_q increases to the right edge; inflate it to cover the support.
    let m = moments_from_equation_f64(params, 12)?;
    let mut x_hi = 1.25 * m.values()[11] / m.values()[10];
    if !(x_hi.is_finite() && x_hi > 0.0) {
        return Err(Error::Numerical(format!("cannot bound the support from moments {:?}", m.values())));
    }
    let eta = config.eta.unwrap_or(1e-8 * x_hi);
    if !(eta > 0.0) {
        return Err(Error::invalid("eta must be positive"));
    }
    let thr = config.threshold;
    let rho = |x: f64| inverted_rho(x, eta, params, atom, RATIO);

    let n = config.scan_points;
    let (xs, vals) = loop {
        let xs: Vec<f64> = (0..n).map(|k| x_hi * (k as f64 + 0.5) / n as f64).collect();
        let vals: Vec<(f64, Complex64)> = xs.par_iter().map(|&x| rho(x)).collect::<Result<_>>()?;
        if vals[n - 1].0 > thr || vals[n - 2].0 > thr {
            x_hi *= 1.5;
            if x_hi > 1e3 * m.values()[0].max(1e-300) * 64.0 {
                return Err(Error::Numerical("support does not terminate".into()));
            }
            continue;
        }
        break (xs, vals);
    };
    let vals = resolve_jumps(&xs, vals, eta, params, atom)?;

    // Runs of points above threshold, with edges refined by bisection.
    let inside: Vec<bool> = vals.iter().map(|v| v.0 > thr).collect();
    let above = |x: f64| -> Result<bool> { Ok(rho(x)?.0 > thr) };
    let bisect = |mut out: f64, mut inn: f64| -> Result<f64> {
        for _ in 0..48 {
            let mid = 0.5 * (out + inn);
            if above(mid)? {
                inn = mid;
            } else {
                out = mid;
            }
        }
        Ok(0.5 * (out + inn))
    };
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < n {
        if !inside[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && inside[k] {
            k += 1;
        }
        let end = k - 1;
        let a = if start == 0 {
            let tiny = x_hi * 1e-12;
            if above(tiny)? {
                0.0
            } else {
                bisect(tiny, xs[0])?
            }
        } else {
            bisect(xs[start - 1], xs[start])?
        };
        let b = bisect(xs[end + 1], xs[end])?;
        intervals.push((a, b));
    }
    if intervals.is_empty() {
        return Err(Error::Numerical("no support found".into()));
    }
    SpectralDensity::from_intervals(&intervals, atom, eta, config.nodes_per_interval, |x| Ok(rho(x)?.0))
}

/// A scan value whose transform differs from both neighbours by more than ten
/// times the neighbouring increments is re-solved with a finer continuation.
fn resolve_jumps(
    xs: &[f64],
    mut vals: Vec<(f64, Complex64)>,
    eta: f64,
    params: &SpectralParams,
    atom: f64,
) -> Result<Vec<(f64, Complex64)>> {
    let n = vals.len();
    let is_jump = |v: &[(f64, Complex64)], k: usize| {
        let d = |i: usize, j: usize| (v[i].1 - v[j].1).norm();
        let outer = d(k - 1, k - 2).max(d(k + 2, k + 1));
        outer > 0.0 && d(k, k - 1) > 10.0 * outer && d(k + 1, k) > 10.0 * outer
    };
    for k in 2..n.saturating_sub(2) {
        if is_jump(&vals, k) {
            vals[k] = inverted_rho(xs[k], eta, params, atom, FINE_RATIO)?;
            if is_jump(&vals, k) {
                return Err(Error::Numerical(format!(
                    "root tracking jump at x = {}: G = {} between {} and {}",
                    xs[k],
                    vals[k].1,
                    vals[k - 1].1,
                    vals[k + 1].1
                )));
            }
        }
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stieltjes::mp::{mp_density, mp_edges};

    #[test]
    fn marchenko_pastur_shape_one() {
        let p = SpectralParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let d = density(&p, &DensityConfig::default()).unwrap();
        assert_eq!(d.support.len(), 1);
        assert!(d.support[0].0 < 1e-9);
        assert!((d.support[0].1 - 4.0).abs() < 1e-6);
        let err = d
            .grid
            .iter()
            .zip(&d.rho)
            .filter(|(&x, _)| (0.05..=3.95).contains(&x))
            .map(|(&x, &r)| (r - mp_density(x, 1.0, 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "sup error {err}");
        assert!((d.total_mass_check - 1.0).abs() < 2e-3);
        assert!((d.first_moment - 1.0).abs() < 2e-3);
    }

    #[test]
    fn marchenko_pastur_half_support() {
        let p = SpectralParams::new(1.0, 0.0, 0.5, 1.0).unwrap();
        let d = density(&p, &DensityConfig::default()).unwrap();
        let (a, b) = mp_edges(0.5, 1.0);
        assert!((d.support[0].0 - a).abs() < 1e-6 && (d.support[0].1 - b).abs() < 1e-6, "{:?}", d.support);
    }

    #[test]
    fn atom_and_mass_with_general_thetas() {
        let p = SpectralParams::new(1.0, 0.4, 2.0, 1.0).unwrap();
        let d = density(&p, &DensityConfig::default()).unwrap();
        assert!((d.atom_at_zero - 0.5).abs() < 1e-15);
        assert!((d.total_mass_check - 1.0).abs() < 2e-3, "{}", d.total_mass_check);
        assert!((d.first_moment - 1.0).abs() < 2e-3, "{}", d.first_moment);
        assert_eq!(d.cdf(-1e-3), 0.0);
        assert!((d.cdf(0.0) - 0.5).abs() < 1e-12);
        assert_eq!(d.cdf_left(0.0), 0.0);
        assert!((d.cdf(1e6) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = SpectralParams::new(1.0, 0.5, 1.0, 1.0).unwrap();
        let d = density(&p, &DensityConfig::default()).unwrap();
        for u in [0.1, 0.35, 0.5, 0.9] {
            assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-9);
        }
    }
}
