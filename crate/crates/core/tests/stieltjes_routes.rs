//! Cross-checks between the fixed-point solver, the inverted density and
//! the moment series.

use num_complex::Complex64;
use proptest::prelude::*;
use spectral_law::stieltjes::{
    density, equation_residual, moments_from_equation_f64, mp, ridge_trace, solve_g, DensityConfig,
};
use spectral_law::SpectralParams;

fn cases() -> Vec<SpectralParams> {
    vec![
        SpectralParams::new(1.0, 0.6, 1.0, 1.0).unwrap(),
        SpectralParams::new(1.0, 0.3, 0.5, 1.0).unwrap(),
        SpectralParams::new(1.5, 1.0, 2.0, 1.0).unwrap(),
        SpectralParams::new(1.0, 0.8, 1.0, 3.0).unwrap(),
    ]
}

#[test]
fn density_moments_match_series() {
    for p in cases() {
        let d = density(&p, &DensityConfig::default()).unwrap();
        let m = moments_from_equation_f64(&p, 4).unwrap();
        assert!((d.moment(0) - 1.0).abs() < 2e-3, "{p:?} mass {}", d.moment(0));
        for q in 1..=4u32 {
            let expected = *m.get(q as usize).unwrap();
            let got = d.moment(q);
            assert!((got - expected).abs() < 1e-3 * expected, "{p:?} q {q}: {got} vs {expected}");
        }
    }
}

#[test]
fn solver_matches_transform_of_inverted_density() {
    for p in cases() {
        let d = density(&p, &DensityConfig::default()).unwrap();
        for z in [Complex64::new(1.0, 1.0), Complex64::new(-0.5, 0.3), Complex64::new(4.0, 0.5)] {
            let from_density: Complex64 = d
                .grid
                .iter()
                .zip(&d.weights)
                .zip(&d.rho)
                .map(|((&x, &w), &r)| w * r / (x - z))
                .sum::<Complex64>()
                + d.atom_at_zero / -z;
            let g = solve_g(z, &p, None).unwrap().g;
            assert!((g - from_density).norm() < 1e-3, "{p:?} at {z}: {g} vs {from_density}");
        }
    }
}

#[test]
fn large_z_expansion() {
    for p in cases() {
        let m = moments_from_equation_f64(&p, 8).unwrap();
        let z = Complex64::new(200.0, 150.0);
        let series = -(1.0 / z)
            * (1..=8).fold(Complex64::new(1.0, 0.0), |acc, q| acc + m.get(q).unwrap() / z.powi(q as i32));
        let g = solve_g(z, &p, None).unwrap().g;
        assert!((g - series).norm() < 1e-12 * (1.0 / z).norm(), "{p:?}: {g} vs {series}");
    }
}

#[test]
fn ridge_trace_matches_density_integral() {
    for p in cases() {
        let d = density(&p, &DensityConfig::default()).unwrap();
        let lambda = p.ratio();
        for gamma in [0.1, 1.0, 10.0] {
            let resolvent = d.atom_at_zero / gamma
                + d.grid.iter().zip(&d.weights).zip(&d.rho).map(|((&x, &w), &r)| w * r / (x + gamma)).sum::<f64>();
            let expected = lambda * resolvent + (1.0 - lambda) / gamma;
            let got = ridge_trace(&p, gamma).unwrap().trace_per_m;
            assert!((got - expected).abs() < 2e-3 * expected, "{p:?} gamma {gamma}: {got} vs {expected}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn upper_half_plane_roots(
        theta1 in 0.2f64..3.0,
        frac in 0.0f64..1.0,
        phi in 0.2f64..4.0,
        psi in 0.2f64..4.0,
        x in -2.0f64..12.0,
        log_y in -2.0f64..1.5,
    ) {
        let p = SpectralParams::new(theta1, frac * theta1, phi, psi).unwrap();
        let z = Complex64::new(x, 10f64.powf(log_y));
        let pt = solve_g(z, &p, None).unwrap();
        prop_assert!(pt.g.im > 0.0);
        prop_assert!(equation_residual(pt.g, z, &p) < 1e-9);
        let conj = solve_g(z.conj(), &p, None).unwrap();
        prop_assert!((conj.g - pt.g.conj()).norm() <= 1e-12 * pt.g.norm());
    }

    #[test]
    fn linear_case_is_marchenko_pastur(
        theta1 in 0.2f64..3.0,
        phi in 0.2f64..4.0,
        psi in 0.2f64..4.0,
        x in -2.0f64..12.0,
        log_y in -1.0f64..1.5,
    ) {
        let p = SpectralParams::new(theta1, 0.0, phi, psi).unwrap();
        let z = Complex64::new(x, 10f64.powf(log_y));
        let g = solve_g(z, &p, None).unwrap().g;
        let reference = mp::mp_stieltjes(z, phi / psi, theta1);
        prop_assert!((g - reference).norm() < 1e-9 * (1.0 + reference.norm()), "{} vs {}", g, reference);
    }
}
