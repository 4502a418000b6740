use std::f64::consts::PI;

use casimir_core::matsubara::ThermalState;
use casimir_core::numerics::{integrate_box, Domain, Tolerance};
use casimir_core::pair_energy::{
    angular_reduction, damped_rspace_pair_energy, kspace_pair_energy, pair_energy_t0, pair_free_energy,
    smeared_pair_energy, Medium,
};

/// Direct cubature of `∫dΩ∫dΩ′ [(k̂·k̂′)² + 1] cos((k+k′)·r)` with r along z.
/// The integrand depends on the azimuths only through their difference,
/// which leaves three dimensions and a factor 2π.
fn angular_cubature(k: f64, kp: f64, r: f64) -> f64 {
    let res = integrate_box(
        |x| {
            let (u, up, dphi) = (x[0], x[1], x[2]);
            let dot = u * up + ((1.0 - u * u) * (1.0 - up * up)).sqrt() * dphi.cos();
            (dot * dot + 1.0) * (k * r * u + kp * r * up).cos()
        },
        &[Domain::finite(-1.0, 1.0), Domain::finite(-1.0, 1.0), Domain::finite(0.0, 2.0 * PI)],
        Tolerance::new(1e-11, 1e-9),
    )
    .unwrap();
    2.0 * PI * res.value
}

#[test]
fn angular_reduction_matches_direct_cubature() {
    for &(k, kp, r) in &[(0.3, 0.7, 1.0), (1.5, 2.5, 1.0), (4.0, 1.0, 0.8), (2.0, 2.0, 2.0)] {
        let reduced = angular_reduction(k, kp, r);
        let direct = angular_cubature(k, kp, r);
        let scale = 16.0 * PI * PI;
        assert!(
            (reduced - direct).abs() <= 1e-7 * scale,
            "k = {k}, k' = {kp}, r = {r}: {reduced} vs {direct}"
        );
    }
    // k = k' = 0: ∫∫ [(k̂·k̂′)² + 1] = (4π)²(1/3 + 1)
    assert!((angular_reduction(0.0, 0.0, 1.0) - 16.0 * PI * PI * 4.0 / 3.0).abs() < 1e-12);
}

fn cold(r: f64, beta: f64, alpha: f64) -> f64 {
    pair_free_energy(r, &Medium::new(alpha, 0.0).unwrap(), &ThermalState::new(beta).unwrap())
        .unwrap()
        .value
}

#[test]
fn thermal_scaling_is_exact() {
    // summand depends on κr only, so F(sr, sβ) = F(r, β)/s⁷
    for &(r, beta) in &[(1.0, 0.5), (1.0, 3.0), (0.7, 20.0)] {
        let base = cold(r, beta, 1.0);
        for &s in &[0.5, 2.0, 4.0] {
            let scaled = cold(s * r, s * beta, 1.0) * s.powi(7);
            assert!(((scaled - base) / base).abs() < 1e-9, "r = {r}, beta = {beta}, s = {s}");
        }
    }
}

#[test]
fn free_energy_interpolates_monotonically_between_limits() {
    let r = 1.0;
    let t0 = pair_energy_t0(r, 1.0).unwrap().value;
    let betas: Vec<f64> = (0..25).map(|i| 10f64.powf(-3.0 + 0.375 * i as f64)).collect();
    let values: Vec<f64> = betas.iter().map(|&b| cold(r, b, 1.0)).collect();
    // deep in the T = 0 regime neighbours differ by less than the sum tolerance
    for w in values.windows(2) {
        assert!(w[0] <= w[1] + 1e-10 * w[1].abs(), "not monotone in beta: {w:?}");
    }
    for (&b, &f) in betas.iter().zip(&values) {
        // every Matsubara term is positive, so F lies below both the static term and the T = 0 law
        let static_term = -3.0 / (b * r.powi(6));
        assert!(f <= static_term + 1e-14 * static_term.abs(), "beta = {b}: {f} vs {static_term}");
        assert!(f <= t0 + 1e-12 * t0.abs(), "beta = {b}: {f} vs {t0}");
    }
    assert!(((values[0] * betas[0] + 3.0) / 3.0).abs() < 1e-4);
    assert!(((values[24] - t0) / t0).abs() < 1e-4);
}

#[test]
fn crossover_near_beta_of_order_r() {
    // ratio to the classical law drops from 1 towards 23β/(12πr) as the pair cools
    let r = 1.0;
    let ratio = |b: f64| cold(r, b, 1.0) / (-3.0 / (b * r.powi(6)));
    assert!((ratio(1e-2) - 1.0).abs() < 1e-3);
    assert!(ratio(1.0) > 1.0);
    let ratio_cold = ratio(1e4);
    let t0_ratio = 23.0 * 1e4 / (12.0 * PI * r);
    assert!(((ratio_cold - t0_ratio) / t0_ratio).abs() < 1e-4);
}

#[test]
fn pair_energy_is_monotone_in_separation() {
    let rs: Vec<f64> = (1..40).map(|i| 0.1 * i as f64).collect();
    for beta in [0.3, 3.0, 300.0] {
        let v: Vec<f64> = rs.iter().map(|&r| cold(r, beta, 1.0)).collect();
        for w in v.windows(2) {
            assert!(w[0] < w[1] && w[1] < 0.0);
        }
    }
}

#[test]
fn damped_routes_agree() {
    let tol = Tolerance::relative(1e-10);
    for &(r, lambda) in &[(1.0, 0.1), (1.0, 0.5), (2.0, 0.3)] {
        let k = kspace_pair_energy(r, 1.0, lambda, tol).unwrap().value;
        let smeared = smeared_pair_energy(r, 1.0, lambda, tol).unwrap().value;
        let damped = damped_rspace_pair_energy(r, 1.0, lambda, Tolerance::relative(1e-9)).unwrap().value;
        assert!(((k - smeared) / smeared).abs() < 1e-8, "{k} vs {smeared}");
        assert!(((damped - smeared) / smeared).abs() < 1e-7, "{damped} vs {smeared}");
    }
}

#[test]
fn damping_weakens_the_attraction() {
    let closed = pair_energy_t0(1.0, 1.0).unwrap().value;
    let mut last = closed;
    for lambda in [0.01, 0.05, 0.2, 1.0] {
        let v = smeared_pair_energy(1.0, 1.0, lambda, Tolerance::relative(1e-10)).unwrap().value;
        assert!(v > last && v < 0.0, "lambda = {lambda}: {v} after {last}");
        last = v;
    }
}
