use serde::Serialize;

use super::pipeline::{empirical_moments, EmpiricalSpectrum};
use crate::error::{Error, Result};
use crate::stieltjes::SpectralDensity;

/// Eigenvalues within this fraction of the largest one count as exact zeros.
pub const ZERO_MODE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentGap {
    pub q: usize,
    pub empirical: f64,
    pub theoretical: f64,
    /// `(empirical - theoretical) / SE` with the across-trial standard error.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub ks_distance: f64,
    pub l1_cdf_distance: f64,
    pub moment_gaps: Vec<MomentGap>,
    pub trials: usize,
    /// Fraction of eigenvalues outside the theoretical support hull.
    pub mass_outside: f64,
}

/// All eigenvalues of all trials, sorted, with numerical zero modes snapped to 0.
pub fn pooled(trials: &[Vec<f64>]) -> Vec<f64> {
    let mut all: Vec<f64> = trials.iter().flatten().copied().collect();
    let max = all.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    for v in &mut all {
        if v.abs() <= ZERO_MODE_RTOL * max {
            *v = 0.0;
        }
    }
    all.sort_by(f64::total_cmp);
    all
}

/// `sup_x |F_n(x) - F(x)|` for sorted samples against a distribution given
/// by its right-continuous CDF and left limits.
pub fn ks_one_sample<F, L>(sorted: &[f64], cdf: F, cdf_left: L) -> f64
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        d = d.max((i + 1) as f64 / n - cdf(x)).max(cdf_left(x) - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic on sorted inputs; ties handled.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `(1/(hi - lo)) integral |F_n - F|` over the joint range, on a uniform grid.
pub fn l1_cdf_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F, lo: f64, hi: f64) -> f64 {
    const POINTS: usize = 20_000;
    if !(hi > lo) || sorted.is_empty() {
        return 0.0;
    }
    let n = sorted.len() as f64;
    let mut acc = 0.0;
    for k in 0..POINTS {
        let x = lo + (hi - lo) * (k as f64 + 0.5) / POINTS as f64;
        let emp = sorted.partition_point(|&v| v <= x) as f64 / n;
        acc += (emp - cdf(x)).abs();
    }
    acc / POINTS as f64
}

/// Mean and standard error across trials of each moment `q = 1..=q_max`.
pub fn moment_statistics(trials: &[Vec<f64>], q_max: usize) -> Result<Vec<(f64, f64)>> {
    let per_trial: Vec<Vec<f64>> = trials
        .iter()
        .map(|t| empirical_moments(t, q_max).map(|m| m.values().to_vec()))
        .collect::<Result<_>>()?;
    let t = per_trial.len() as f64;
    Ok((0..q_max)
        .map(|q| {
            let mean = per_trial.iter().map(|m| m[q]).sum::<f64>() / t;
            let se = if per_trial.len() > 1 {
                (per_trial.iter().map(|m| (m[q] - mean).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt()
            } else {
                f64::NAN
            };
            (mean, se)
        })
        .collect())
}

/// Distances between the pooled empirical law of `trials` and `density`,
/// with moment z-scores against `theory_moments` (or the density's own
/// moments when `None`).
pub fn compare(trials: &[Vec<f64>], density: &SpectralDensity, q_max: usize, theory_moments: Option<&[f64]>) -> Result<ComparisonReport> {
    if trials.is_empty() || trials.iter().any(|t| t.is_empty()) {
        return Err(Error::invalid("no eigenvalues to compare"));
    }
    let all = pooled(trials);
    let ks = ks_one_sample(&all, |x| density.cdf(x), |x| density.cdf_left(x));
    let (a, b) = density.hull();
    let lo = a.min(all[0]);
    let hi = b.max(all[all.len() - 1]);
    let l1 = l1_cdf_distance(&all, |x| density.cdf(x), lo, hi);
    let outside = all.iter().filter(|&&x| x < a - 1e-12 || x > b + 1e-12).count() as f64 / all.len() as f64;

    let stats = moment_statistics(trials, q_max)?;
    let moment_gaps = stats
        .iter()
        .enumerate()
        .map(|(i, &(mean, se))| {
            let q = i + 1;
            let theoretical = match theory_moments {
                Some(m) => m[i],
                None => density.moment(q as u32),
            };
            MomentGap {
                q,
                empirical: mean,
                theoretical,
                z_score: (mean - theoretical) / se,
            }
        })
        .collect();
    Ok(ComparisonReport {
        ks_distance: ks,
        l1_cdf_distance: l1,
        moment_gaps,
        trials: trials.len(),
        mass_outside: outside,
    })
}

/// Eigenvalues of each trial, or of the given layer (0-based) of each trial.
pub fn spectra(runs: &[EmpiricalSpectrum], layer: Option<usize>) -> Vec<Vec<f64>> {
    runs.iter()
        .map(|r| match layer {
            Some(p) => r.layer_spectra.get(p).cloned().unwrap_or_default(),
            None => r.eigenvalues.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Normalized so that the bars integrate to one.
    pub density: Vec<f64>,
}

/// Freedman–Diaconis histogram of sorted samples.
pub fn fd_histogram(sorted: &[f64]) -> Result<Histogram> {
    let n = sorted.len();
    if n < 2 {
        return Err(Error::invalid("need at least two samples for a histogram"));
    }
    let quantile = |p: f64| {
        let pos = p * (n - 1) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        sorted[i] + frac * (sorted[(i + 1).min(n - 1)] - sorted[i])
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let range = (hi - lo).max(f64::MIN_POSITIVE);
    let width = 2.0 * iqr / (n as f64).cbrt();
    let bins = if width > 0.0 { ((range / width).ceil() as usize).clamp(1, 10_000) } else { 1 };
    let w = range / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in sorted {
        let k = (((x - lo) / w) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram {
        edges: (0..=bins).map(|k| lo + w * k as f64).collect(),
        density: counts.iter().map(|&c| c as f64 / (n as f64 * w)).collect(),
    })
}
