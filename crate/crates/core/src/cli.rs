//! Command-line front end. Every command is a pure function of its flags
//! and seed and writes machine-readable output tagged with the schema version.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::acceptance;
use crate::activation::{ActivationConfig, ThetaParams};
use crate::cactus::{count_table, moment, moments_f64, mp_moment, multilayer_mp_moment, Q_MAX};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, histogram_svg, write_eigenvalues_csv, write_json, write_table, RunConfig};
use crate::montecarlo::{compare, fd_histogram, pooled, ridge_trace_from_spectrum, run_trials, spectra};
use crate::params::{ratio_to_f64, RationalParams, SpectralParams};
use crate::stieltjes::{density, moments_from_equation, moments_from_equation_f64, mp, ridge_trace, DensityConfig};
use crate::SCHEMA_VERSION;

/// Exit code when the acceptance suite reports a failure.
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "spectral-law", version, about = "Limiting spectra of nonlinear random matrix ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gaussian functionals theta1, theta2, theta3 of an activation.
    Thetas(ThetasArgs),
    /// Admissible graph counts A(q, I_i, I_j, b) as CSV.
    Counts {
        #[arg(long)]
        q: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moments from enumeration and from the series of the fixed-point equation.
    Moments {
        #[arg(long, default_value_t = 6)]
        q_max: usize,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limiting density by Stieltjes inversion (CSV plus JSON sidecar).
    Density {
        #[command(flatten)]
        params: ParamArgs,
        /// Imaginary offset for the inversion.
        #[arg(long)]
        eta: Option<f64>,
        /// Quadrature nodes per support interval.
        #[arg(long, default_value_t = 600)]
        nodes: usize,
        /// Output directory; CSV to standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo spectra compared with the limit law.
    Simulate(RunArgs),
    /// Ridge trace (1/m) Tr (Y^T Y/m + gamma)^-1 and scaled training loss.
    Ridge {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Layer-by-layer spectra of a deep random network.
    Multilayer(RunArgs),
    /// Runs the acceptance suite; exit code 4 on any failure.
    Verify {
        /// Only these criteria (1..=10); all when empty.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Debug, Args)]
pub struct ThetasArgs {
    /// Built-in activation: linear, tanh, cos, softplus, hermite3, monomialK, relu.
    #[arg(long = "f", conflicts_with = "activation_json")]
    pub f: Option<String>,
    /// Activation as JSON, e.g. '{"kind": "polynomial", "params": {"coefficients": [0, 1]}}'.
    #[arg(long)]
    pub activation_json: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    /// Rescale so that theta1 = 1.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 8)]
    pub hermite_order: usize,
    /// Allow activations outside the analytic class (relu).
    #[arg(long)]
    pub experimental: bool,
}

/// Limit parameters, either given directly or derived from an activation.
#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Rational or decimal, e.g. 1/2.
    #[arg(long)]
    pub theta1: Option<String>,
    #[arg(long)]
    pub theta2: Option<String>,
    #[arg(long, default_value = "1")]
    pub phi: String,
    #[arg(long, default_value = "1")]
    pub psi: String,
    /// Derive theta1, theta2 from this built-in activation instead.
    #[arg(long = "f", conflicts_with_all = ["theta1", "theta2"])]
    pub f: Option<String>,
    #[arg(long)]
    pub normalize: bool,
    /// Allow activations outside the analytic class (relu).
    #[arg(long)]
    pub experimental: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG histogram with the theoretical curve.
    #[arg(long)]
    pub svg: bool,
}

enum Params {
    Exact(RationalParams),
    Float(SpectralParams, Option<ThetaParams>),
}

impl Params {
    fn float(&self) -> SpectralParams {
        match self {
            Params::Exact(p) => p.to_f64(),
            Params::Float(p, _) => *p,
        }
    }

    fn echo(&self) -> Value {
        match self {
            Params::Exact(p) => json!({
                "theta1": p.theta1.to_string(),
                "theta2": p.theta2.to_string(),
                "phi": p.phi.to_string(),
                "psi": p.psi.to_string(),
            }),
            Params::Float(p, t) => json!({
                "theta1": p.theta1, "theta2": p.theta2, "phi": p.phi, "psi": p.psi, "thetas": t,
            }),
        }
    }
}

impl ParamArgs {
    fn resolve(&self) -> Result<Params> {
        match &self.f {
            Some(name) => {
                let f = activation_from_name(name, self.normalize, self.experimental)?;
                let thetas = f.compute_thetas(1.0, 1.0)?;
                let phi = crate::params::parse_rational(&self.phi)?;
                let psi = crate::params::parse_rational(&self.psi)?;
                let p = SpectralParams::new(thetas.theta1, thetas.theta2, ratio_to_f64(&phi), ratio_to_f64(&psi))?;
                Ok(Params::Float(p, Some(thetas)))
            }
            None => {
                let t1 = self.theta1.as_deref().ok_or_else(|| Error::invalid("give --theta1 and --theta2, or --f"))?;
                let t2 = self.theta2.as_deref().ok_or_else(|| Error::invalid("give --theta1 and --theta2, or --f"))?;
                if self.normalize {
                    return Err(Error::invalid("--normalize only applies with --f"));
                }
                Ok(Params::Exact(RationalParams::parse(t1, t2, &self.phi, &self.psi)?))
            }
        }
    }
}

/// Builds a centered built-in activation at `sigma = 1`.
fn activation_from_name(name: &str, normalize: bool, experimental: bool) -> Result<crate::ActivationSpec> {
    let mut cfg = builtin_config(name, experimental)?;
    cfg.normalize_theta1 = normalize;
    cfg.build(1.0)
}

fn output<F>(path: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(p)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

fn print_stdout(text: &str) -> Result<()> {
    let mut lock = std::io::stdout().lock();
    writeln!(lock, "{text}")?;
    lock.flush()?;
    Ok(())
}

fn cmd_thetas(args: &ThetasArgs) -> Result<()> {
    let sigma = args.sigma_w * args.sigma_x;
    let mut cfg = match (&args.f, &args.activation_json) {
        (Some(name), None) => builtin_config(name, args.experimental)?,
        (None, Some(text)) => ActivationConfig::from_json(text)?,
        _ => return Err(Error::invalid("give --f or --activation-json")),
    };
    if args.normalize {
        cfg.normalize_theta1 = true;
    }
    let f = cfg.build(sigma)?;
    let t = f.compute_thetas(args.sigma_w, args.sigma_x)?;
    let h = f.hermite_projection(sigma, args.hermite_order)?;
    let c1 = h.coefficients.get(1).copied().unwrap_or(0.0);
    let out = json!({
        "schema": SCHEMA_VERSION,
        "activation": cfg,
        "sigma_w": args.sigma_w,
        "sigma_x": args.sigma_x,
        "center": f.center,
        "scale": f.scale,
        "theta1": t.theta1,
        "theta2": t.theta2,
        "theta3": t.theta3,
        "hermite": {
            "coefficients": h.coefficients,
            "c1_squared": c1 * c1,
            "theta2_delta": (t.theta2 - c1 * c1).abs(),
            "tail": h.tail,
            "tail_warning": h.tail_warning,
        },
    });
    print_stdout(&serde_json::to_string_pretty(&out)?)?;
    Ok(())
}

/// Activation config for a built-in name, including the `monomialK` shorthand.
fn builtin_config(name: &str, experimental: bool) -> Result<ActivationConfig> {
    if let Some(k) = name.strip_prefix("monomial").filter(|s| !s.is_empty()) {
        let k: u32 = k.parse().map_err(|_| Error::invalid(format!("bad monomial degree in {name:?}")))?;
        let mut cfg = ActivationConfig::named("monomial");
        cfg.params = Some(json!({ "k": k }));
        return Ok(cfg);
    }
    let mut cfg = ActivationConfig::named(name);
    cfg.experimental = experimental;
    Ok(cfg)
}

fn cmd_counts(q: usize, out: Option<&Path>) -> Result<()> {
    let table = count_table(q)?;
    output(out, |w| {
        writeln!(w, "{}", crate::io::schema_line())?;
        table.write_csv(w, true)
    })
}

fn cmd_moments(q_max: usize, params: &ParamArgs, out: Option<&Path>) -> Result<()> {
    if q_max == 0 || q_max > Q_MAX {
        return Err(Error::Capacity {
            what: "moment order",
            requested: q_max,
            limit: Q_MAX,
        });
    }
    let header = ["q", "cactus", "series", "delta", "mp", "cactus_f64"];
    let mut rows = Vec::new();
    match params.resolve()? {
        Params::Exact(p) => {
            let series = moments_from_equation(&p, q_max)?;
            let shape = &p.phi / &p.psi;
            for q in 1..=q_max {
                let c = moment(q, &p)?;
                let s = series.get(q).expect("series has q_max terms").clone();
                let mp_col = if num_traits::Zero::is_zero(&p.theta2) {
                    mp_moment(q, &shape, &p.theta1)?.to_string()
                } else {
                    String::new()
                };
                rows.push(vec![
                    q.to_string(),
                    c.to_string(),
                    s.to_string(),
                    (&c - &s).to_string(),
                    mp_col,
                    fmt_f64(ratio_to_f64(&c)),
                ]);
            }
        }
        Params::Float(p, _) => {
            let cactus = moments_f64(q_max, &p)?;
            let series = moments_from_equation_f64(&p, q_max)?;
            for q in 1..=q_max {
                let c = cactus.values()[q - 1];
                let s = series.values()[q - 1];
                let mp_col = if p.theta2 == 0.0 {
                    fmt_f64(mp_moment(q, &p.ratio(), &p.theta1)?)
                } else {
                    String::new()
                };
                rows.push(vec![q.to_string(), fmt_f64(c), fmt_f64(s), fmt_f64(c - s), mp_col, fmt_f64(c)]);
            }
        }
    }
    output(out, |w| write_table(w, &header, &rows))
}

fn cmd_density(params: &ParamArgs, eta: Option<f64>, nodes: usize, out: Option<&Path>) -> Result<()> {
    let resolved = params.resolve()?;
    let p = resolved.float();
    let config = DensityConfig {
        eta,
        nodes_per_interval: nodes,
        ..DensityConfig::default()
    };
    let d = density(&p, &config)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join("density.csv"))?);
            d.write_csv(&mut file)?;
            file.flush()?;
            write_json(&dir.join("density.json"), &d.sidecar(resolved.echo()))?;
            Ok(())
        }
        None => d.write_csv(std::io::stdout().lock()),
    }
}

fn cmd_ridge(params: &ParamArgs, gammas: &[f64], out: Option<&Path>) -> Result<()> {
    let p = params.resolve()?.float();
    let mut rows = Vec::new();
    for &g in gammas {
        let r = ridge_trace(&p, g)?;
        rows.push(vec![fmt_f64(g), fmt_f64(r.trace_per_m), fmt_f64(r.expected_loss_scaled)]);
    }
    output(out, |w| write_table(w, &["gamma", "trace_per_m", "expected_loss_scaled"], &rows))
}

/// Runs `config` and writes `eigenvalues.csv`, `report.json` and optionally
/// `histogram.svg` into `dir`. Returns the report.
pub fn simulate_to_dir(config: &RunConfig, dir: &Path, svg: bool) -> Result<Value> {
    let run = config.prepare()?;
    let sim = &run.simulation;
    let runs = run_trials(sim, config.seed, config.trials)?;
    std::fs::create_dir_all(dir)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join("eigenvalues.csv"))?);
    write_eigenvalues_csv(&mut file, &runs, None)?;
    file.flush()?;

    // Single layer: the solver law. Deeper stacks: the Marchenko–Pastur law
    // of the output shape, which is the limit when theta2 = 0.
    let (law, reference) = if sim.shape.layers() == 1 {
        (density(&run.params, &DensityConfig::default())?, "fixed-point solver")
    } else {
        (mp::mp_law(sim.shape.output_ratio(), 1.0, 2000)?, "marchenko-pastur of the output shape")
    };
    let trials = spectra(&runs, None);
    let theory: Vec<f64> = if sim.shape.layers() == 1 {
        moments_from_equation_f64(&run.params, 4)?.values().to_vec()
    } else {
        (1..=4)
            .map(|q| multilayer_mp_moment(q, &sim.shape.phi, &sim.shape.psi_list))
            .collect::<Result<_>>()?
    };
    let report = compare(&trials, &law, 4, Some(&theory))?;

    let mut ridge = Vec::new();
    for &g in &config.gamma_list {
        let emp: Vec<f64> = trials
            .iter()
            .map(|t| ridge_trace_from_spectrum(t, sim.shape.m, g))
            .collect::<Result<_>>()?;
        let mean = emp.iter().sum::<f64>() / emp.len() as f64;
        let theory = if sim.shape.layers() == 1 {
            Some(ridge_trace(&run.params, g)?.trace_per_m)
        } else {
            None
        };
        ridge.push(json!({"gamma": g, "empirical": mean, "theory": theory}));
    }

    let value = json!({
        "schema": SCHEMA_VERSION,
        "config": config.to_value(),
        "thetas": run.thetas,
        "params": run.params,
        "reference": reference,
        "comparison": report,
        "ridge": ridge,
        "seeds": runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
    });
    write_json(&dir.join("report.json"), &value)?;
    if svg || config.svg {
        let all = pooled(&trials);
        let hist = fd_histogram(&all)?;
        let curve: Vec<(f64, f64)> = law.grid.iter().copied().zip(law.rho.iter().copied()).collect();
        let title = format!("{} trials, n1 = {}, vs {reference}", config.trials, sim.shape.output_width());
        std::fs::write(dir.join("histogram.svg"), histogram_svg(&hist, &curve, &title))?;
    }
    Ok(value)
}

/// Per-layer spectra of a deep network, each compared with the
/// Marchenko–Pastur law of the shape reached at that layer.
pub fn multilayer_to_dir(config: &RunConfig, dir: &Path, svg: bool) -> Result<Value> {
    let run = config.prepare()?;
    let mut sim = run.simulation.clone();
    sim.keep_layers = true;
    sim.normalize_by_theta1 = true;
    let runs = run_trials(&sim, config.seed, config.trials)?;
    std::fs::create_dir_all(dir)?;
    let mut layers = Vec::new();
    let mut ratio = sim.shape.phi;
    for (p, &psi) in sim.shape.psi_list.iter().enumerate() {
        ratio /= psi;
        let name = format!("layer_{}.csv", p + 1);
        let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
        write_eigenvalues_csv(&mut file, &runs, Some(p))?;
        file.flush()?;
        let law = mp::mp_law(ratio, 1.0, 2000)?;
        let theory: Vec<f64> = (1..=4)
            .map(|q| multilayer_mp_moment(q, &sim.shape.phi, &sim.shape.psi_list[..=p]))
            .collect::<Result<_>>()?;
        let trials = spectra(&runs, Some(p));
        let report = compare(&trials, &law, 4, Some(&theory))?;
        if svg || config.svg {
            let hist = fd_histogram(&pooled(&trials))?;
            let curve: Vec<(f64, f64)> = law.grid.iter().copied().zip(law.rho.iter().copied()).collect();
            let title = format!("layer {} vs Marchenko-Pastur({ratio:.4})", p + 1);
            std::fs::write(dir.join(format!("layer_{}.svg", p + 1)), histogram_svg(&hist, &curve, &title))?;
        }
        layers.push(json!({"layer": p + 1, "shape": ratio, "file": name, "comparison": report}));
    }
    let value = json!({
        "schema": SCHEMA_VERSION,
        "config": config.to_value(),
        "thetas": run.thetas,
        "theta2_is_zero": run.thetas.theta2 < 1e-12,
        "layers": layers,
        "seeds": runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
    });
    write_json(&dir.join("report.json"), &value)?;
    Ok(value)
}

fn run_dir(args: &RunArgs, config: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_verify(only: &[u8]) -> Result<i32> {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
        return Err(Error::invalid(format!("no criterion {bad}")));
    }
    let mut failed = 0;
    for id in ids {
        let o = acceptance::run_criterion(id);
        print_stdout(&o.line())?;
        if !o.passed {
            failed += 1;
        }
    }
    Ok(if failed == 0 { 0 } else { EXIT_ACCEPTANCE })
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Thetas(args) => cmd_thetas(&args)?,
        Command::Counts { q, out } => cmd_counts(q, out.as_deref())?,
        Command::Moments { q_max, params, out } => cmd_moments(q_max, &params, out.as_deref())?,
        Command::Density { params, eta, nodes, out } => cmd_density(&params, eta, nodes, out.as_deref())?,
        Command::Ridge { params, gamma, out } => cmd_ridge(&params, &gamma, out.as_deref())?,
        Command::Simulate(args) => {
            let config = RunConfig::from_path(&args.config)?;
            let report = simulate_to_dir(&config, &run_dir(&args, &config), args.svg)?;
            print_stdout(&serde_json::to_string_pretty(&report["comparison"])?)?;
        }
        Command::Multilayer(args) => {
            let config = RunConfig::from_path(&args.config)?;
            let report = multilayer_to_dir(&config, &run_dir(&args, &config), args.svg)?;
            print_stdout(&serde_json::to_string_pretty(&report["layers"])?)?;
        }
        Command::Verify { only } => return cmd_verify(&only),
    }
    Ok(0)
}
