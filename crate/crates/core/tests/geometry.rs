use std::f64::consts::PI;

use casimir_core::geometry::{overlap_volume, pair_measure_integral, sphere_form_factor, SphereSpec};
use casimir_core::numerics::{OscillatoryIntegrator, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hit-or-miss estimate of the lens volume from points in the bounding cube of
/// the unit sphere; `(estimate, standard error)`.
fn monte_carlo_overlap(r: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        let rho2 = x * x + y * y;
        if rho2 + z * z <= 1.0 && rho2 + (z - r) * (z - r) <= 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let cube = 8.0;
    (cube * p, cube * (p * (1.0 - p) / samples as f64).sqrt())
}

#[test]
fn overlap_volume_matches_monte_carlo() {
    for (i, &r) in [0.25, 1.0, 1.7].iter().enumerate() {
        let (mc, sigma) = monte_carlo_overlap(r, 10_000_000, 0x5eed + i as u64);
        let exact = overlap_volume(r, 1.0).unwrap();
        assert!((mc - exact).abs() <= 3.0 * sigma, "r = {r}: mc {mc} ± {sigma}, exact {exact}");
    }
}

#[test]
fn overlap_volume_scales_as_a_cubed() {
    for &a in &[0.3, 2.0, 7.5] {
        for &t in &[0.0, 0.4, 1.1, 1.9] {
            let scaled = overlap_volume(t * a, a).unwrap();
            let unit = overlap_volume(t, 1.0).unwrap();
            assert!((scaled - unit * a.powi(3)).abs() <= 1e-13 * a.powi(3));
        }
    }
}

#[test]
fn pair_measure_normalizes_to_volume_squared() {
    for &a in &[0.5, 1.0, 3.0] {
        let v = SphereSpec::new(a).unwrap().volume();
        let got = pair_measure_integral(|_| 1.0, a, 0.0, Tolerance::relative(1e-13)).unwrap();
        assert!(((got.value - v * v) / (v * v)).abs() < 1e-10, "a = {a}: {} vs {}", got.value, v * v);
    }
}

#[test]
fn inverse_seventh_power_matches_antiderivative() {
    let a: f64 = 1.0;
    for &r_min in &[1e-4, 1e-3, 1e-2, 0.1, 1.0] {
        let got = pair_measure_integral(|r| r.powi(-7), a, r_min, Tolerance::relative(1e-13)).unwrap();
        let d = 2.0 * a;
        let exact = PI * PI / 3.0
            * (4.0 * a.powi(3) * (r_min.powi(-4) - d.powi(-4)) - 4.0 * a * a * (r_min.powi(-3) - d.powi(-3))
                + (1.0 / r_min - 1.0 / d));
        assert!(((got.value - exact) / exact).abs() < 1e-10, "r_min = {r_min}: {} vs {exact}", got.value);
        assert!(got.error_estimate <= 1e-12 * exact.abs());
    }
}

#[test]
fn form_factor_satisfies_parseval() {
    // ∫|Ṽ(q)|² d³q/(2π)³ = V. The integrand tends to c·cos²(q)/q² with
    // c = 9V²/(2π²); its mean c/(2q²) would leave a 1/Q tail, so c/(2(1+q²))
    // is subtracted and added back as cπ/4.
    let a = 1.0;
    let v = SphereSpec::new(a).unwrap().volume();
    let c = 9.0 * v * v / (2.0 * PI * PI);
    let res = OscillatoryIntegrator::new(Tolerance::absolute(1e-12))
        .integrate(0.0, PI / 2.0, |q| {
            let f = sphere_form_factor(q, a).unwrap();
            4.0 * PI * q * q * f * f / (2.0 * PI).powi(3) - c / (2.0 * (1.0 + q * q))
        })
        .unwrap();
    let got = res.value + c * PI / 4.0;
    assert!(((got - v) / v).abs() < 1e-9, "{got} vs {v}");
}

#[test]
fn form_factor_is_continuous_at_series_switch() {
    // slope there is −Vx/5, about 8e−4, so a 2e−9 step moves the value by ~2e−12
    let below = sphere_form_factor(0.999_999e-3, 1.0).unwrap();
    let above = sphere_form_factor(1.000_001e-3, 1.0).unwrap();
    assert!((below - above).abs() < 1e-11);
}
