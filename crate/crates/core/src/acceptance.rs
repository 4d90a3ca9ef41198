//! The acceptance suite: ten end-to-end checks tying the three routes
//! together. Shared by the `verify` command and the `acceptance` test target.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::activation::ActivationSpec;
use crate::cactus::{count_table, moment, narayana};
use crate::error::{Error, Result};
use crate::montecarlo::{
    ks_two_sample, moment_statistics, pooled, ridge_trace_from_spectrum, run_trials, spectra, compare,
    DistributionSpec, SimulationConfig,
};
use crate::params::{RationalParams, SpectralParams};
use crate::shape::ModelShape;
use crate::stieltjes::{density, moments_from_equation, mp, ridge_trace, solve_g, DensityConfig, RESIDUAL_TOL};

/// Run seed for every simulation in the suite. Fixed once, never tuned.
pub const ACCEPTANCE_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.1}s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const TITLES: [&str; 10] = [
    "exact moments: cactus enumeration = series of the fixed-point equation",
    "Narayana identity for q <= 7",
    "Marchenko-Pastur specialization of the solver density",
    "solver residual, Im G > 0 and conjugate symmetry on a 20x20 grid",
    "simulated spectra vs limit laws (tanh, cos, x^3 - 3x)",
    "universality across entry distributions",
    "multilayer invariance",
    "variance decay of m_2 between n1 = 500 and n1 = 1000",
    "ridge trace: simulation vs solver",
    "determinism of simulate across thread counts",
];

/// Runs criterion `id` (1..=10), timing it and turning errors into failures.
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => Err(Error::invalid(format!("no criterion {id}"))),
    };
    let (passed, detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every criterion, writing one line per criterion to `out` as it finishes.
pub fn run_all<W: Write>(mut out: W) -> Vec<CriterionOutcome> {
    (1..=10)
        .map(|id| {
            let o = run_criterion(id);
            let _ = writeln!(out, "{}", o.line());
            let _ = out.flush();
            o
        })
        .collect()
}

type Outcome = Result<(bool, String)>;

pub fn exact_tuples() -> Vec<RationalParams> {
    [
        ((1, 1), (0, 1), (1, 1), (1, 1)),
        ((1, 1), (1, 1), (1, 1), (1, 1)),
        ((2, 1), (1, 2), (1, 2), (2, 1)),
        ((3, 2), (1, 3), (2, 5), (7, 4)),
        ((1, 1), (1, 4), (3, 1), (1, 2)),
    ]
    .into_iter()
    .map(|(a, b, c, d)| RationalParams::from_ints(a, b, c, d).expect("valid fixture"))
    .collect()
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for p in exact_tuples() {
        let series = moments_from_equation(&p, 6)?;
        for q in 1..=6 {
            let c = moment(q, &p)?;
            if &c != series.get(q).expect("q <= 6") {
                return Ok((false, format!("q = {q}, params {p}: cactus {c} vs series {}", series.get(q).unwrap())));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} exact equalities")))
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    for q in 1..=7 {
        let table = count_table(q)?;
        for k in 0..q {
            let a = table.get(q - k - 1, k, q);
            let n = narayana(q, k)?;
            if a != n {
                return Ok((false, format!("A({q}, {}, {k}, {q}) = {a} but N({q}, {k}) = {n}", q - k - 1)));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} identities")))
}

fn criterion_3() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for (phi, psi) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)] {
        let p = SpectralParams::new(1.0, 0.0, phi, psi)?;
        let lambda = phi / psi;
        let d = density(&p, &DensityConfig::default())?;
        let sup = d.sup_distance(|x| mp::mp_density(x, lambda, 1.0), 0.05);
        let mass = (d.total_mass_check - 1.0).abs();
        let mean = (d.first_moment - 1.0).abs();
        worst = (worst.0.max(sup), worst.1.max(mass), worst.2.max(mean));
        if !(sup < 1e-3 && mass < 2e-3 && mean < 2e-3) {
            return Ok((false, format!("shape {lambda}: sup {sup:.2e}, mass error {mass:.2e}, mean error {mean:.2e}")));
        }
    }
    Ok((
        true,
        format!("max sup {:.2e}, mass error {:.2e}, mean error {:.2e}", worst.0, worst.1, worst.2),
    ))
}

pub fn residual_tuples() -> Vec<SpectralParams> {
    [(1.0, 0.0, 1.0, 1.0), (1.0, 1.0, 1.0, 1.0), (2.0, 0.5, 0.5, 2.0), (1.0, 0.3, 2.0, 0.8), (1.0, 0.6, 1.0, 1.0)]
        .into_iter()
        .map(|(a, b, c, d)| SpectralParams::new(a, b, c, d).expect("valid fixture"))
        .collect()
}

fn criterion_4() -> Outcome {
    let mut worst_res = 0.0f64;
    let mut worst_sym = 0.0f64;
    for p in residual_tuples() {
        for i in 0..20 {
            for j in 0..20 {
                let x = -1.0 + 7.0 * i as f64 / 19.0;
                let y = 10f64.powf(-3.0 + 4.0 * j as f64 / 19.0);
                let z = Complex64::new(x, y);
                let up = solve_g(z, &p, None)?;
                let down = solve_g(z.conj(), &p, None)?;
                if !(up.g.im > 0.0 && up.residual < RESIDUAL_TOL) {
                    return Ok((false, format!("z = {z}: G = {}, residual {:.2e}", up.g, up.residual)));
                }
                let sym = (down.g - up.g.conj()).norm();
                worst_res = worst_res.max(up.residual).max(down.residual);
                worst_sym = worst_sym.max(sym);
                if sym > 1e-12 * (1.0 + up.g.norm()) {
                    return Ok((false, format!("z = {z}: G(conj z) - conj G(z) = {sym:.2e}")));
                }
            }
        }
    }
    Ok((true, format!("2000 points, max residual {worst_res:.2e}, max asymmetry {worst_sym:.2e}")))
}

fn normalized(f: ActivationSpec) -> Result<ActivationSpec> {
    f.center_gaussian(1.0)?.normalize_theta1(1.0)
}

fn square_config(n0: usize, f: ActivationSpec, dist: DistributionSpec) -> Result<SimulationConfig> {
    SimulationConfig::new(ModelShape::single(n0, 1.0, 1.0)?, f, dist, dist)
}

/// Pooled tanh spectra at `n0 = 2000` for the given entry law.
fn tanh_spectra(dist: DistributionSpec) -> Result<Vec<Vec<f64>>> {
    let cfg = square_config(2000, normalized(ActivationSpec::tanh())?, dist)?;
    Ok(spectra(&run_trials(&cfg, ACCEPTANCE_SEED, 10)?, None))
}

fn criterion_5() -> Outcome {
    let tanh = normalized(ActivationSpec::tanh())?;
    let thetas = tanh.compute_thetas(1.0, 1.0)?;
    let params = SpectralParams::new(thetas.theta1, thetas.theta2, 1.0, 1.0)?;
    let law = density(&params, &DensityConfig::default())?;
    let ks_tanh = compare(&tanh_spectra(DistributionSpec::gaussian(1.0))?, &law, 2, None)?.ks_distance;

    let mp_law = mp::mp_law(1.0, 1.0, 2000)?;
    let mut parts = vec![format!("tanh KS {ks_tanh:.4}")];
    let mut ok = ks_tanh < 0.05;
    for (name, f) in [("cos", ActivationSpec::cos()), ("x^3-3x", ActivationSpec::hermite3())] {
        let cfg = square_config(2000, normalized(f)?, DistributionSpec::gaussian(1.0))?;
        let runs = run_trials(&cfg, ACCEPTANCE_SEED, 10)?;
        let ks = compare(&spectra(&runs, None), &mp_law, 2, None)?.ks_distance;
        ok &= ks < 0.05;
        parts.push(format!("{name} KS {ks:.4}"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let reference = pooled(&tanh_spectra(DistributionSpec::gaussian(1.0))?);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, dist) in [("rademacher", DistributionSpec::rademacher(1.0)), ("uniform", DistributionSpec::uniform(1.0))] {
        let ks = ks_two_sample(&pooled(&tanh_spectra(dist)?), &reference);
        ok &= ks < 0.05;
        parts.push(format!("{name} vs gaussian KS {ks:.4}"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_7() -> Outcome {
    let cos = normalized(ActivationSpec::cos())?;
    let gauss = DistributionSpec::gaussian(1.0);
    let mut ok = true;
    let mut parts = Vec::new();

    let cfg = SimulationConfig::new(ModelShape::multilayer(1000, 1.0, &[1.0, 1.0, 1.0])?, cos.clone(), gauss, gauss)?;
    let runs = run_trials(&cfg, ACCEPTANCE_SEED, 10)?;
    let mp_one = mp::mp_law(1.0, 1.0, 2000)?;
    for layer in 0..3 {
        let ks = compare(&spectra(&runs, Some(layer)), &mp_one, 2, None)?.ks_distance;
        ok &= ks < 0.06;
        parts.push(format!("layer {} KS {ks:.4}", layer + 1));
    }

    let cfg = SimulationConfig::new(ModelShape::multilayer(1000, 1.0, &[1.0, 2.0])?, cos, gauss, gauss)?;
    let runs = run_trials(&cfg, ACCEPTANCE_SEED, 10)?;
    let mp_half = mp::mp_law(cfg.shape.output_ratio(), 1.0, 2000)?;
    let ks = compare(&spectra(&runs, None), &mp_half, 2, None)?.ks_distance;
    ok &= ks < 0.06;
    parts.push(format!("psi (1, 2) final KS {ks:.4}"));
    Ok((ok, parts.join(", ")))
}

fn m2_variance(n0: usize) -> Result<f64> {
    let cfg = square_config(n0, normalized(ActivationSpec::tanh())?, DistributionSpec::gaussian(1.0))?;
    let runs = spectra(&run_trials(&cfg, ACCEPTANCE_SEED, 30)?, None);
    let se = moment_statistics(&runs, 2)?[1].1;
    Ok(se * se * runs.len() as f64)
}

fn criterion_8() -> Outcome {
    let v500 = m2_variance(500)?;
    let v1000 = m2_variance(1000)?;
    let ratio = v500 / v1000;
    Ok((
        (2.5..=6.5).contains(&ratio),
        format!("Var m2: {v500:.3e} at 500, {v1000:.3e} at 1000, ratio {ratio:.3}"),
    ))
}

fn criterion_9() -> Outcome {
    let cfg = square_config(1000, ActivationSpec::linear(), DistributionSpec::gaussian(1.0))?;
    let runs = run_trials(&cfg, ACCEPTANCE_SEED, 10)?;
    let params = SpectralParams::new(1.0, 1.0, 1.0, 1.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for gamma in [0.1, 1.0, 10.0] {
        let theory = ridge_trace(&params, gamma)?.trace_per_m;
        let emp = runs
            .iter()
            .map(|r| ridge_trace_from_spectrum(&r.eigenvalues, cfg.shape.m, gamma))
            .collect::<Result<Vec<f64>>>()?;
        let mean = emp.iter().sum::<f64>() / emp.len() as f64;
        let rel = (mean / theory - 1.0).abs();
        ok &= rel < 0.02;
        parts.push(format!("gamma {gamma}: {mean:.5} vs {theory:.5} ({:.2}%)", 100.0 * rel));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_10() -> Outcome {
    let config = crate::io::RunConfig::from_json(
        r#"{"shape": {"n0": 300, "n1": 240, "m": 200},
            "activation": {"kind": "tanh", "normalize_theta1": true},
            "trials": 4, "seed": 99}"#,
    )?;
    let dir = std::env::temp_dir().join(format!("spectral-law-determinism-{}", std::process::id()));
    let mut files = Vec::new();
    for threads in [1usize, 4] {
        let out = dir.join(format!("threads-{threads}"));
        std::fs::create_dir_all(&out)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?;
        pool.install(|| crate::cli::simulate_to_dir(&config, &out, false))?;
        files.push(std::fs::read(out.join("eigenvalues.csv"))?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let same = files[0] == files[1];
    Ok((same, format!("eigenvalue CSVs of {} bytes {}", files[0].len(), if same { "identical" } else { "differ" })))
}
