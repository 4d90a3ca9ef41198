use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of the ensemble and their limiting ratios.
///
/// `phi = n0 / m` and `psi = n0 / n1`. For a network of `L` layers,
/// `layer_widths = [n1, ..., nL]` and `psi_list[p] = n_p / n_{p+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelShape {
    pub n0: usize,
    pub n1: usize,
    pub m: usize,
    pub layer_widths: Vec<usize>,
    pub phi: f64,
    pub psi: f64,
    pub psi_list: Vec<f64>,
    pub sigma_w: f64,
    pub sigma_x: f64,
}

impl ModelShape {
    /// Single layer with sizes rounded from the ratios.
    pub fn single(n0: usize, phi: f64, psi: f64) -> Result<Self> {
        Self::multilayer(n0, phi, &[psi])
    }

    /// `L = psi_list.len()` layers; widths rounded from the ratios.
    pub fn multilayer(n0: usize, phi: f64, psi_list: &[f64]) -> Result<Self> {
        if psi_list.is_empty() {
            return Err(Error::invalid("need at least one layer"));
        }
        check_ratio("phi", phi)?;
        for &p in psi_list {
            check_ratio("psi", p)?;
        }
        let m = round_dim(n0 as f64 / phi)?;
        let mut widths = Vec::with_capacity(psi_list.len());
        let mut prev = n0 as f64;
        for &p in psi_list {
            prev /= p;
            widths.push(round_dim(prev)?);
        }
        let shape = ModelShape {
            n0,
            n1: widths[0],
            m,
            layer_widths: widths,
            phi,
            psi: psi_list[0],
            psi_list: psi_list.to_vec(),
            sigma_w: 1.0,
            sigma_x: 1.0,
        };
        shape.validate()?;
        Ok(shape)
    }

    /// Exact sizes; ratios are taken from them.
    pub fn from_sizes(n0: usize, n1: usize, m: usize) -> Result<Self> {
        if n0 == 0 || n1 == 0 || m == 0 {
            return Err(Error::invalid("dimensions must be positive"));
        }
        let psi = n0 as f64 / n1 as f64;
        Ok(ModelShape {
            n0,
            n1,
            m,
            layer_widths: vec![n1],
            phi: n0 as f64 / m as f64,
            psi,
            psi_list: vec![psi],
            sigma_w: 1.0,
            sigma_x: 1.0,
        })
    }

    pub fn with_sigmas(mut self, sigma_w: f64, sigma_x: f64) -> Result<Self> {
        check_ratio("sigma_w", sigma_w)?;
        check_ratio("sigma_x", sigma_x)?;
        self.sigma_w = sigma_w;
        self.sigma_x = sigma_x;
        Ok(self)
    }

    pub fn layers(&self) -> usize {
        self.layer_widths.len()
    }

    /// Width of the last layer; the spectrum has this many eigenvalues.
    pub fn output_width(&self) -> usize {
        *self.layer_widths.last().expect("at least one layer")
    }

    /// Limiting `n_L / m`, the Marchenko–Pastur shape of the last layer when `theta2 = 0`.
    pub fn output_ratio(&self) -> f64 {
        self.phi / self.psi_list.iter().product::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.m == 0 || self.layer_widths.contains(&0) {
            return Err(Error::invalid("dimensions must be positive"));
        }
        if self.layer_widths.len() != self.psi_list.len() || self.layer_widths[0] != self.n1 {
            return Err(Error::invalid("layer widths and psi list disagree"));
        }
        check_ratio("phi", self.phi)?;
        check_ratio("sigma_w", self.sigma_w)?;
        check_ratio("sigma_x", self.sigma_x)?;
        let tol = 1.0 / self.n0.min(self.n1) as f64;
        if (self.n0 as f64 / self.m as f64 - self.phi).abs() > tol.max(self.phi * 0.5 / self.m as f64) {
            return Err(Error::invalid(format!(
                "n0/m = {} is not within rounding of phi = {}",
                self.n0 as f64 / self.m as f64,
                self.phi
            )));
        }
        let mut prev = self.n0;
        for (&w, &p) in self.layer_widths.iter().zip(&self.psi_list) {
            check_ratio("psi", p)?;
            let tol = 1.0 / prev.min(w) as f64;
            if (prev as f64 / w as f64 - p).abs() > tol.max(p * 0.5 / w as f64) {
                return Err(Error::invalid(format!(
                    "width ratio {}/{} is not within rounding of psi = {p}",
                    prev, w
                )));
            }
            prev = w;
        }
        Ok(())
    }
}

fn check_ratio(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn round_dim(v: f64) -> Result<usize> {
    let r = v.round();
    if r < 1.0 || !r.is_finite() {
        return Err(Error::invalid(format!("dimension {v} rounds below 1")));
    }
    Ok(r as usize)
}
