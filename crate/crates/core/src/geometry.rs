//! Sphere geometry: the pair-distance measure that reduces a double volume
//! integral `∫∫ h(|r₁ − r₂|)` to one dimension, and the Fourier form factor.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::numerics::special::spherical_j1;
use crate::numerics::{Domain, Integrator, QuadratureResult, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub a: f64,
}

impl SphereSpec {
    pub fn new(a: f64) -> Result<Self> {
        require_positive("a", a)?;
        Ok(Self { a })
    }

    pub fn volume(&self) -> f64 {
        4.0 * PI / 3.0 * self.a.powi(3)
    }

    pub fn surface(&self) -> f64 {
        4.0 * PI * self.a * self.a
    }
}

/// Volume shared by a sphere of radius `a` and its copy translated by `r`.
pub fn overlap_volume(r: f64, a: f64) -> Result<f64> {
    require_non_negative("r", r)?;
    require_positive("a", a)?;
    if r >= 2.0 * a {
        return Ok(0.0);
    }
    let gap = 2.0 * a - r;
    Ok(PI / 12.0 * (4.0 * a + r) * gap * gap)
}

/// `4πr²·V_ov(r)`, expanded as `(π²/3)(16a³r² − 12a²r³ + r⁵)` on `[0, 2a]`.
pub fn pair_measure_density(r: f64, a: f64) -> f64 {
    if !(0.0..2.0 * a).contains(&r) {
        return 0.0;
    }
    let gap = 2.0 * a - r;
    // factored form keeps full relative precision next to the double zero at 2a
    PI * PI / 3.0 * r * r * (4.0 * a + r) * gap * gap
}

/// `∫_{r_min}^{2a} 4πr²·V_ov(r)·h(r) dr`.
///
/// Breakpoints are placed geometrically from `r_min` so that integrands which
/// are steep near the lower limit (such as `r⁻⁷`) are resolved uniformly.
pub fn pair_measure_integral<H>(h: H, a: f64, r_min: f64, tol: Tolerance) -> Result<QuadratureResult>
where
    H: Fn(f64) -> f64,
{
    pair_measure_integral_with_inner_error(|r| (h(r), 0.0), a, r_min, tol)
}

/// As [`pair_measure_integral`], for an `h` that carries its own error bound.
pub fn pair_measure_integral_with_inner_error<H>(
    h: H,
    a: f64,
    r_min: f64,
    tol: Tolerance,
) -> Result<QuadratureResult>
where
    H: Fn(f64) -> (f64, f64),
{
    let first = if r_min > 0.0 { 2.0 * r_min } else { a / 32.0 };
    pair_measure_integral_refined(h, a, r_min, first, tol)
}

/// As [`pair_measure_integral_with_inner_error`] with the geometric breakpoint
/// ladder starting at `first_break` (use the integrand's own length scale).
pub fn pair_measure_integral_refined<H>(
    h: H,
    a: f64,
    r_min: f64,
    first_break: f64,
    tol: Tolerance,
) -> Result<QuadratureResult>
where
    H: Fn(f64) -> (f64, f64),
{
    require_positive("a", a)?;
    require_positive("first_break", first_break)?;
    require_non_negative("r_min", r_min)?;
    if r_min >= 2.0 * a {
        return Err(Error::InvalidInput(format!(
            "r_min = {r_min} must be below the sphere diameter {}",
            2.0 * a
        )));
    }
    let upper = 2.0 * a;
    let mut points = Vec::new();
    let mut p = first_break;
    while p < upper {
        if p > r_min {
            points.push(p);
        }
        p *= 2.0;
    }
    Integrator::new(tol)
        .max_cells(20_000)
        .breakpoints(points)
        .integrate_with_inner_error(Domain::finite(r_min, upper), |r| {
            let (v, e) = h(r);
            let w = pair_measure_density(r, a);
            (w * v, w * e)
        })
}

/// Fourier transform of the sphere's indicator function, `Ṽ(q) = V·3j₁(qa)/(qa)`.
pub fn sphere_form_factor(q: f64, a: f64) -> Result<f64> {
    require_non_negative("q", q)?;
    require_positive("a", a)?;
    let v = 4.0 * PI / 3.0 * a.powi(3);
    let x = q * a;
    if x < 1e-3 {
        let x2 = x * x;
        return Ok(v * (1.0 - x2 / 10.0 + x2 * x2 / 280.0));
    }
    require_finite("q·a", x)?;
    Ok(v * 3.0 * spherical_j1(x) / x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn overlap_examples() {
        assert_relative_eq!(overlap_volume(0.0, 1.0).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_eq!(overlap_volume(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(overlap_volume(3.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(overlap_volume(1.0, 1.0).unwrap(), 5.0 * PI / 12.0, max_relative = 1e-15);
        assert!(overlap_volume(-0.1, 1.0).is_err());
    }

    #[test]
    fn measure_density_matches_expanded_polynomial() {
        let a = 1.3;
        for i in 0..20 {
            let r = 2.0 * a * i as f64 / 20.0;
            let poly = PI * PI / 3.0 * (16.0 * a.powi(3) * r * r - 12.0 * a * a * r.powi(3) + r.powi(5));
            let direct = 4.0 * PI * r * r * overlap_volume(r, a).unwrap();
            assert_relative_eq!(pair_measure_density(r, a), poly, epsilon = 1e-13, max_relative = 1e-12);
            assert_relative_eq!(pair_measure_density(r, a), direct, epsilon = 1e-13, max_relative = 1e-12);
        }
    }

    #[test]
    fn form_factor_examples() {
        let v = 4.0 * PI / 3.0;
        assert_eq!(sphere_form_factor(0.0, 1.0).unwrap(), v);
        assert_relative_eq!(sphere_form_factor(PI, 1.0).unwrap(), 1.273_24, max_relative = 1e-5);
        assert_relative_eq!(sphere_form_factor(PI, 1.0).unwrap(), v * 3.0 / (PI * PI), max_relative = 1e-14);
        let x = 0.999e-3;
        let closed = v * 3.0 * spherical_j1(x) / x;
        assert_relative_eq!(sphere_form_factor(x, 1.0).unwrap(), closed, max_relative = 1e-9);
    }

    #[test]
    fn zero_integrand() {
        let r = pair_measure_integral(|_| 0.0, 1.0, 0.0, Tolerance::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(pair_measure_integral(|_| 1.0, 1.0, 2.0, Tolerance::default()).is_err());
    }
}
