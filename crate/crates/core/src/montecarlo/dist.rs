use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest matrix (in entries) a single sample may allocate: 1.2 GB of f64.
pub const MAX_ENTRIES: usize = 150_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Gaussian,
    Rademacher,
    Uniform,
    CenteredBernoulli,
}

/// Centered entry law with prescribed variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    #[serde(default = "one")]
    pub variance: f64,
    /// Success probability of the centered Bernoulli law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl DistributionSpec {
    pub fn gaussian(variance: f64) -> Self {
        DistributionSpec {
            kind: DistributionKind::Gaussian,
            variance,
            p: None,
        }
    }

    pub fn rademacher(variance: f64) -> Self {
        DistributionSpec {
            kind: DistributionKind::Rademacher,
            variance,
            p: None,
        }
    }

    pub fn uniform(variance: f64) -> Self {
        DistributionSpec {
            kind: DistributionKind::Uniform,
            variance,
            p: None,
        }
    }

    pub fn centered_bernoulli(p: f64, variance: f64) -> Self {
        DistributionSpec {
            kind: DistributionKind::CenteredBernoulli,
            variance,
            p: Some(p),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::invalid(format!("variance must be positive, got {}", self.variance)));
        }
        match (self.kind, self.p) {
            (DistributionKind::CenteredBernoulli, Some(p)) if p > 0.0 && p < 1.0 => Ok(()),
            (DistributionKind::CenteredBernoulli, _) => {
                Err(Error::invalid("centered-bernoulli needs p in (0, 1)"))
            }
            (_, Some(_)) => Err(Error::invalid("p only applies to centered-bernoulli")),
            _ => Ok(()),
        }
    }

    /// One draw.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let s = self.sigma();
        match self.kind {
            DistributionKind::Gaussian => s * rng.sample::<f64, _>(StandardNormal),
            DistributionKind::Rademacher => {
                if rng.random::<bool>() {
                    s
                } else {
                    -s
                }
            }
            DistributionKind::Uniform => s * 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            DistributionKind::CenteredBernoulli => {
                let p = self.p.unwrap_or(0.5);
                let scale = s / (p * (1.0 - p)).sqrt();
                if rng.random::<f64>() < p {
                    (1.0 - p) * scale
                } else {
                    -p * scale
                }
            }
        }
    }
}

/// `rows x cols` i.i.d. matrix. Column `j` is drawn from its own ChaCha
/// stream, so the result does not depend on how columns are scheduled.
pub fn sample_matrix(rows: usize, cols: usize, dist: &DistributionSpec, seed: u64) -> Result<Mat<f64>> {
    dist.validate()?;
    let entries = rows
        .checked_mul(cols)
        .filter(|&e| e <= MAX_ENTRIES)
        .ok_or(Error::Capacity {
            what: "matrix entries",
            requested: rows.saturating_mul(cols),
            limit: MAX_ENTRIES,
        })?;
    let mut buf = vec![0.0; entries];
    if rows > 0 {
        buf.par_chunks_mut(rows).enumerate().for_each(|(j, col)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            for v in col.iter_mut() {
                *v = dist.draw(&mut rng);
            }
        });
    }
    Ok(MatRef::from_column_major_slice(&buf, rows, cols).to_owned())
}
