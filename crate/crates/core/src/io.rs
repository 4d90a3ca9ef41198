//! Run configuration and the file formats shared by the command-line front end.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::activation::{ActivationConfig, ThetaParams};
use crate::error::{Error, Result};
use crate::montecarlo::{DistributionSpec, EmpiricalSpectrum, Histogram, SimulationConfig};
use crate::params::SpectralParams;
use crate::shape::ModelShape;

/// Seventeen significant digits, `.` as decimal separator.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment line opening every CSV file.
pub fn schema_line() -> String {
    format!("# {}", crate::SCHEMA_VERSION)
}

/// Matrix sizes. Either `n1` and `m` for one layer, or `psi_list` with `m`
/// (or `phi`) for a stack of layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub n0: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_list: Option<Vec<f64>>,
}

impl ShapeConfig {
    pub fn build(&self) -> Result<ModelShape> {
        match (&self.psi_list, self.n1) {
            (Some(_), Some(_)) => Err(Error::invalid("give either n1 or psi_list, not both")),
            (Some(list), None) => {
                let phi = match (self.m, self.phi) {
                    (Some(m), None) => self.n0 as f64 / m as f64,
                    (None, Some(phi)) => phi,
                    _ => return Err(Error::invalid("psi_list needs exactly one of m and phi")),
                };
                ModelShape::multilayer(self.n0, phi, list)
            }
            (None, Some(n1)) => {
                if self.phi.is_some() {
                    return Err(Error::invalid("phi is only used with psi_list"));
                }
                let m = self.m.ok_or_else(|| Error::invalid("n1 needs m"))?;
                ModelShape::from_sizes(self.n0, n1, m)
            }
            (None, None) => Err(Error::invalid("shape needs n1 and m, or psi_list")),
        }
    }
}

fn default_dist() -> DistributionSpec {
    DistributionSpec::gaussian(1.0)
}

fn default_trials() -> usize {
    10
}

/// JSON run description for `simulate` and `multilayer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shape: ShapeConfig,
    pub activation: ActivationConfig,
    #[serde(default = "default_dist")]
    pub dist_w: DistributionSpec,
    #[serde(default = "default_dist")]
    pub dist_x: DistributionSpec,
    /// Must agree with the shape when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gamma_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub svg: bool,
}

/// A validated run: simulation settings plus the matching limit parameters.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub simulation: SimulationConfig,
    pub thetas: ThetaParams,
    pub params: SpectralParams,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn prepare(&self) -> Result<PreparedRun> {
        let shape = self.shape.build()?;
        if let Some(l) = self.layers {
            if l != shape.layers() {
                return Err(Error::invalid(format!("layers = {l} but the shape has {}", shape.layers())));
            }
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.gamma_list.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("gamma_list entries must be positive"));
        }
        self.dist_w.validate()?;
        self.dist_x.validate()?;
        let sigma = self.dist_w.sigma() * self.dist_x.sigma();
        let activation = self.activation.build(sigma)?;
        let thetas = activation.compute_thetas(self.dist_w.sigma(), self.dist_x.sigma())?;
        let params = SpectralParams::new(thetas.theta1, thetas.theta2, shape.phi, shape.psi)?;
        let simulation = SimulationConfig::new(shape, activation, self.dist_w, self.dist_x)?;
        Ok(PreparedRun {
            simulation,
            thetas,
            params,
        })
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}

/// One row per trial: `trial,seed,lambda_1,...,lambda_n`.
pub fn write_eigenvalues_csv<W: Write>(mut writer: W, runs: &[EmpiricalSpectrum], layer: Option<usize>) -> Result<()> {
    writeln!(writer, "{}", schema_line())?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let spectra: Vec<&Vec<f64>> = runs
        .iter()
        .map(|r| match layer {
            Some(p) => r.layer_spectra.get(p).unwrap_or(&r.eigenvalues),
            None => &r.eigenvalues,
        })
        .collect();
    let width = spectra.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut header = vec!["trial".to_string(), "seed".to_string()];
    header.extend((1..=width).map(|i| format!("lambda_{i}")));
    w.write_record(&header)?;
    for (t, (run, eig)) in runs.iter().zip(&spectra).enumerate() {
        let mut row = vec![t.to_string(), run.seed.to_string()];
        row.extend(eig.iter().map(|&x| fmt_f64(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Generic numeric table preceded by the schema comment.
pub fn write_table<W: Write>(mut writer: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(writer, "{}", schema_line())?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Histogram bars with a theoretical density curve on top.
pub fn histogram_svg(hist: &Histogram, curve: &[(f64, f64)], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let x_lo = hist.edges[0].min(curve.first().map_or(f64::INFINITY, |p| p.0));
    let x_hi = hist.edges[hist.edges.len() - 1].max(curve.last().map_or(f64::NEG_INFINITY, |p| p.0));
    // Very tall spikes (atoms, edge singularities) would flatten the plot.
    let mut heights: Vec<f64> = hist.density.iter().copied().chain(curve.iter().map(|p| p.1)).collect();
    heights.sort_by(f64::total_cmp);
    let y_hi = heights[(heights.len() as f64 * 0.98) as usize].max(1e-12) * 1.2;
    let sx = |x: f64| PAD + (x - x_lo) / (x_hi - x_lo).max(1e-300) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y.min(y_hi) / y_hi) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<!-- {} -->", crate::SCHEMA_VERSION);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    for (d, e) in hist.density.iter().zip(hist.edges.windows(2)) {
        let (x0, x1) = (sx(e[0]), sx(e[1]));
        let y = sy(*d);
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#9bb7d4" stroke="#5a7fa8" stroke-width="0.3"/>"##,
            (x1 - x0).max(0.0),
            (H - PAD - y).max(0.0)
        );
    }
    if !curve.is_empty() {
        let pts: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{x_lo:.3}</text>"#,
        H - PAD + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{x_hi:.3}</text>"#,
        W - PAD,
        H - PAD + 16.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
