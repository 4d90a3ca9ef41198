use std::sync::Once;

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use rayon::prelude::*;

use super::dist::DistributionSpec;
use crate::activation::ActivationSpec;
use crate::cactus::MomentSeries;
use crate::error::{Error, Result};
use crate::shape::ModelShape;

/// Everything that determines one draw of the ensemble besides the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub shape: ModelShape,
    /// Centered activation; `theta1` must be its value at `sigma_w * sigma_x`.
    pub activation: ActivationSpec,
    pub theta1: f64,
    pub dist_w: DistributionSpec,
    pub dist_x: DistributionSpec,
    /// Divide the final matrix by `theta1`. Always on for more than one layer.
    pub normalize_by_theta1: bool,
    /// Keep the spectrum of every layer, not just the last.
    pub keep_layers: bool,
}

impl SimulationConfig {
    pub fn new(shape: ModelShape, activation: ActivationSpec, dist_w: DistributionSpec, dist_x: DistributionSpec) -> Result<Self> {
        let thetas = activation.compute_thetas(dist_w.sigma(), dist_x.sigma())?;
        let shape = shape.with_sigmas(dist_w.sigma(), dist_x.sigma())?;
        let multilayer = shape.layers() > 1;
        let cfg = SimulationConfig {
            shape,
            activation,
            theta1: thetas.theta1,
            dist_w,
            dist_x,
            normalize_by_theta1: multilayer,
            keep_layers: multilayer,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        self.dist_w.validate()?;
        self.dist_x.validate()?;
        if !(self.theta1 > 0.0 && self.theta1.is_finite()) {
            return Err(Error::invalid("theta1 must be positive"));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(self.shape.sigma_w, self.dist_w.sigma()) || !close(self.shape.sigma_x, self.dist_x.sigma()) {
            return Err(Error::invalid("shape sigmas disagree with the entry distributions"));
        }
        Ok(())
    }
}

/// Sorted eigenvalues of one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Per-layer spectra, the last equal to `eigenvalues`; empty unless kept.
    pub layer_spectra: Vec<Vec<f64>>,
    pub shape: ModelShape,
    pub layers: usize,
    pub seed: u64,
    pub distribution_w: DistributionSpec,
    pub distribution_x: DistributionSpec,
    pub activation: ActivationSpec,
}

/// SplitMix64 finalizer.
pub fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of trial `t` under a run seed.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    mix(seed ^ mix(t))
}

/// Seed of the matrix playing `role` within a trial.
pub fn role_seed(trial: u64, role: u64) -> u64 {
    mix(trial ^ mix(role.wrapping_add(0x5eed)))
}

const ROLE_X: u64 = 0;
const ROLE_W: u64 = 1;

fn sequential_linear_algebra() {
    static ONCE: Once = Once::new();
    // Each trial runs single-threaded so results cannot depend on the pool.
    ONCE.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// `f(renorm * W Y / sqrt(n_prev))` entrywise.
pub fn forward_layer(w: MatRef<'_, f64>, y_prev: MatRef<'_, f64>, f: &ActivationSpec, n_prev: usize, renorm: f64) -> Result<Mat<f64>> {
    if w.ncols() != y_prev.nrows() || n_prev == 0 {
        return Err(Error::invalid(format!(
            "cannot multiply {}x{} by {}x{}",
            w.nrows(),
            w.ncols(),
            y_prev.nrows(),
            y_prev.ncols()
        )));
    }
    let mut out = Mat::<f64>::zeros(w.nrows(), y_prev.ncols());
    matmul(out.as_mut(), Accum::Replace, w, y_prev, renorm / (n_prev as f64).sqrt(), Par::Seq);
    for j in 0..out.ncols() {
        f.apply_in_place(out.col_as_slice_mut(j))?;
    }
    Ok(out)
}

/// Ascending eigenvalues of `Y Y^T * scale`, computed on the smaller Gram
/// matrix with the missing zero modes appended.
pub fn gram_eigenvalues(y: MatRef<'_, f64>, scale: f64) -> Result<Vec<f64>> {
    sequential_linear_algebra();
    let (n, m) = (y.nrows(), y.ncols());
    let small = n.min(m);
    let mut gram = Mat::<f64>::zeros(small, small);
    let (lhs, rhs) = if n <= m { (y, y.transpose()) } else { (y.transpose(), y) };
    triangular::matmul(
        gram.as_mut(),
        BlockStructure::TriangularLower,
        Accum::Replace,
        lhs,
        BlockStructure::Rectangular,
        rhs,
        BlockStructure::Rectangular,
        scale,
        Par::Seq,
    );
    let mut eig = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed on a {small}x{small} Gram matrix: {e:?}")))?;
    if n > m {
        eig.splice(0..0, std::iter::repeat_n(0.0, n - m));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// One draw of the ensemble.
pub fn empirical_spectrum(config: &SimulationConfig, seed: u64) -> Result<EmpiricalSpectrum> {
    config.validate()?;
    sequential_linear_algebra();
    let shape = &config.shape;
    let x = super::dist::sample_matrix(shape.n0, shape.m, &config.dist_x, role_seed(seed, ROLE_X))?;
    let renorm_deep = config.dist_x.sigma() / config.theta1.sqrt();
    let scale = if config.normalize_by_theta1 {
        1.0 / (shape.m as f64 * config.theta1)
    } else {
        1.0 / shape.m as f64
    };

    let mut y = x;
    let mut n_prev = shape.n0;
    let mut layer_spectra = Vec::new();
    let layers = shape.layers();
    for (p, &width) in shape.layer_widths.iter().enumerate() {
        let w = super::dist::sample_matrix(width, n_prev, &config.dist_w, role_seed(seed, ROLE_W + p as u64))?;
        // The input already has entry variance sigma_x^2, so only deeper
        // layers are rescaled.
        let renorm = if p == 0 { 1.0 } else { renorm_deep };
        y = forward_layer(w.as_ref(), y.as_ref(), &config.activation, n_prev, renorm)?;
        n_prev = width;
        if config.keep_layers || p + 1 == layers {
            layer_spectra.push(gram_eigenvalues(y.as_ref(), scale)?);
        }
    }
    let eigenvalues = layer_spectra.last().cloned().unwrap_or_default();
    if !config.keep_layers {
        layer_spectra.clear();
    }
    Ok(EmpiricalSpectrum {
        eigenvalues,
        layer_spectra,
        shape: shape.clone(),
        layers,
        seed,
        distribution_w: config.dist_w,
        distribution_x: config.dist_x,
        activation: config.activation.clone(),
    })
}

/// `trials` independent draws; trial `t` uses `trial_seed(seed, t)`. The
/// output order and every value are independent of the thread count.
pub fn run_trials(config: &SimulationConfig, seed: u64, trials: usize) -> Result<Vec<EmpiricalSpectrum>> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| empirical_spectrum(config, trial_seed(seed, t)))
        .collect()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `(1/n) sum lambda_i^q` for `q = 1..=q_max`.
pub fn empirical_moments(eigenvalues: &[f64], q_max: usize) -> Result<MomentSeries<f64>> {
    if q_max > 8 {
        return Err(Error::Capacity {
            what: "empirical moment order",
            requested: q_max,
            limit: 8,
        });
    }
    if eigenvalues.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    let n = eigenvalues.len() as f64;
    Ok(MomentSeries::new(
        (1..=q_max as i32)
            .map(|q| compensated_sum(eigenvalues.iter().map(|l| l.powi(q))) / n)
            .collect(),
    ))
}

/// `(1/m) Tr (Y^T Y / m + gamma I)^{-1}` from the spectrum of `Y Y^T / m`
/// (length `n1`, zero modes included).
pub fn ridge_trace_from_spectrum(eigenvalues: &[f64], m: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let n1 = eigenvalues.len() as f64;
    let s = compensated_sum(eigenvalues.iter().map(|l| 1.0 / (l + gamma)));
    Ok((s + (m as f64 - n1) / gamma) / m as f64)
}

pub fn ridge_trace_empirical(y: MatRef<'_, f64>, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let m = y.ncols();
    let eig = gram_eigenvalues(y, 1.0 / m as f64)?;
    ridge_trace_from_spectrum(&eig, m, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::dist::sample_matrix;

    fn linear_config(n0: usize, phi: f64, psi: f64) -> SimulationConfig {
        SimulationConfig::new(
            ModelShape::single(n0, phi, psi).unwrap(),
            ActivationSpec::linear(),
            DistributionSpec::gaussian(1.0),
            DistributionSpec::gaussian(1.0),
        )
        .unwrap()
    }

    #[test]
    fn linear_forward_is_scaled_product() {
        let w = sample_matrix(5, 4, &DistributionSpec::gaussian(1.0), 1).unwrap();
        let y = sample_matrix(4, 3, &DistributionSpec::gaussian(1.0), 2).unwrap();
        let out = forward_layer(w.as_ref(), y.as_ref(), &ActivationSpec::linear(), 4, 1.0).unwrap();
        let expected = &w * &y * faer::Scale(0.5);
        for i in 0..5 {
            for j in 0..3 {
                assert!((out[(i, j)] - expected[(i, j)]).abs() < 1e-14);
            }
        }
        assert!(forward_layer(w.as_ref(), w.as_ref(), &ActivationSpec::linear(), 4, 1.0).is_err());
    }

    #[test]
    fn gram_eigenvalues_match_direct() {
        let y = sample_matrix(6, 4, &DistributionSpec::gaussian(1.0), 3).unwrap();
        let tall = gram_eigenvalues(y.as_ref(), 0.25).unwrap();
        assert_eq!(tall.len(), 6);
        assert!(tall[0] == 0.0 && tall[1] == 0.0);
        let full = (&y * y.transpose() * faer::Scale(0.25)).self_adjoint_eigenvalues(Side::Lower).unwrap();
        for (a, b) in tall.iter().zip(&full) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_case_has_zero_modes() {
        let cfg = linear_config(200, 2.0, 0.5);
        let s = empirical_spectrum(&cfg, 9).unwrap();
        let (n1, m) = (cfg.shape.n1, cfg.shape.m);
        assert!(n1 > m);
        assert_eq!(s.eigenvalues.len(), n1);
        assert_eq!(s.eigenvalues.iter().filter(|&&l| l.abs() < 1e-10).count(), n1 - m);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let cfg = linear_config(60, 1.0, 1.0);
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_trials(&cfg, 17, 4).unwrap());
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_trials(&cfg, 17, 4).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.eigenvalues, y.eigenvalues);
        }
        assert_ne!(a[0].eigenvalues, a[1].eigenvalues);
    }

    #[test]
    fn moments_of_constant_spectrum() {
        let m = empirical_moments(&[1.0; 10], 8).unwrap();
        assert!(m.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(empirical_moments(&[1.0], 9).is_err());
    }

    #[test]
    fn ridge_of_zero_matrix() {
        let y = Mat::<f64>::zeros(3, 5);
        assert!((ridge_trace_empirical(y.as_ref(), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(ridge_trace_empirical(y.as_ref(), 0.0).is_err());
        let y = sample_matrix(10, 20, &DistributionSpec::gaussian(1.0), 4).unwrap();
        assert!((ridge_trace_empirical(y.as_ref(), 1e8).unwrap() * 1e8 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trace_identity_and_psd() {
        let cfg = linear_config(300, 1.0, 1.0);
        let runs = run_trials(&cfg, 3, 5).unwrap();
        let means: Vec<f64> = runs.iter().map(|r| empirical_moments(&r.eigenvalues, 1).unwrap().values()[0]).collect();
        let mean = means.iter().sum::<f64>() / 5.0;
        let sd = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sd / 5f64.sqrt() + 1e-3, "{mean} {sd}");
        for r in &runs {
            let max = r.eigenvalues.last().unwrap();
            assert!(r.eigenvalues[0] >= -1e-8 * max);
        }
    }
}
