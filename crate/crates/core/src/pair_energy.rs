//! Mutual free energy of two identical polarizable particles.
//!
//! Four routes are provided:
//!
//! * [`pair_free_energy`]: the Matsubara sum `F = −(3/2β)·Σ_K α²(2ψ_D² + ψ_Δ²)`
//!   at finite β, with the closed-form r-space kernels;
//! * [`pair_energy_t0`]: the zero-temperature closed form `−23α²/(4πr⁷)`;
//! * [`pair_energy_t0_numeric`]: the β → ∞ limit of the sum as a κ-integral;
//! * [`kspace_pair_energy`]: the Fourier-space double integral over (k, k′) with
//!   exponential damping `e^{−λ(k+k′)}`, extrapolated to λ → 0 by
//!   [`kspace_pair_energy_extrapolated`].
//!
//! All routes evaluate the interaction at Θ = −2; the medium's Θ is only used
//! by the dielectric relation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::kernels::{damped_r_space_kernels, r_space_kernels, ImagWavenumber, ThetaParameter};
use crate::matsubara::{matsubara_sum, zero_t_integral_scaled, SumResult, ThermalState};
use crate::numerics::special::{spherical_j0, spherical_j2};
use crate::numerics::{
    richardson_extrapolate, Domain, Extrapolation, Integrator, OscillatoryIntegrator, Tolerance,
};

/// A dilute medium of identical particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    /// Static polarizability α (length³).
    pub alpha: f64,
    /// Number density ρ (1/length³).
    pub rho: f64,
    pub theta: ThetaParameter,
}

impl Medium {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        require_non_negative("alpha", alpha)?;
        require_non_negative("rho", rho)?;
        Ok(Self {
            alpha,
            rho,
            theta: ThetaParameter::TRANSVERSE,
        })
    }

    pub fn with_theta(mut self, theta: ThetaParameter) -> Self {
        self.theta = theta;
        self
    }

    /// Medium of polarizability `alpha` whose density gives `ε − 1` at leading
    /// dilute order, `ε − 1 = 4πρα`.
    pub fn dilute(eps_minus_one: f64, alpha: f64) -> Result<Self> {
        require_non_negative("eps_minus_one", eps_minus_one)?;
        require_positive("alpha", alpha)?;
        Self::new(alpha, eps_minus_one / (4.0 * PI * alpha))
    }

    /// γ = 4πρα.
    pub fn gamma(&self) -> f64 {
        4.0 * PI * self.rho * self.alpha
    }

    /// Variance of one Cartesian-summed Matsubara dipole component, `⟨a_K²⟩ = 3α/β`.
    pub fn dipole_variance(&self, beta: f64) -> f64 {
        3.0 * self.alpha / beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    RSpaceSum,
    RSpaceT0Closed,
    RSpaceT0Integral,
    KSpace,
    DampedRSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEnergy {
    /// Free energy in units of ħc/length.
    pub value: f64,
    pub route: Route,
    pub error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum: Option<SumResult>,
}

impl PairEnergy {
    fn exact(value: f64, route: Route) -> Self {
        Self {
            value,
            route,
            error_estimate: 0.0,
            sum: None,
        }
    }
}

/// Coefficient C in `F(r) = −C/r⁷` at T = 0, for unit polarizability.
pub const T0_COEFFICIENT: f64 = 23.0 / (4.0 * PI);

/// Matsubara summand `(3/2)α²(2ψ_D² + ψ_Δ²)` at wavenumber κ.
pub fn pair_summand(r: f64, alpha: f64, kappa: f64) -> Result<f64> {
    let kernels = r_space_kernels(r, ImagWavenumber::new(kappa)?)?;
    Ok(1.5 * alpha * alpha * kernels.orientational_square())
}

/// Finite-temperature pair free energy `F = −(1/β)·Σ_K (3/2)α²(2ψ_D² + ψ_Δ²)`.
pub fn pair_free_energy(r: f64, medium: &Medium, state: &ThermalState) -> Result<PairEnergy> {
    require_positive("r", r)?;
    let alpha2 = medium.alpha * medium.alpha;
    if alpha2 == 0.0 {
        return Ok(PairEnergy::exact(0.0, Route::RSpaceSum));
    }
    let r3 = r * r * r;
    let inv_r6 = 1.0 / (r3 * r3);
    // (3/2)(2ψ_D² + ψ_Δ²) r⁶ = e^{−2x}(3 + 6x + 5x² + 2x³ + x⁴), but the kernels
    // are evaluated explicitly so the sum goes through the same code as every other route
    let summand = |kappa: f64| {
        let x = kappa * r;
        let decay = (-x).exp();
        let psi_d = (1.0 + x + x * x / 3.0) * decay;
        let psi_delta = -(2.0 / 3.0) * x * x * decay;
        1.5 * alpha2 * (2.0 * psi_d * psi_d + psi_delta * psi_delta) * inv_r6
    };
    let sum = matsubara_sum(summand, state)?;
    Ok(PairEnergy {
        value: -sum.value / state.beta,
        route: Route::RSpaceSum,
        error_estimate: sum.truncation_error_estimate / state.beta,
        sum: Some(sum),
    })
}

/// `F = −23α²/(4πr⁷)`.
pub fn pair_energy_t0(r: f64, alpha: f64) -> Result<PairEnergy> {
    require_positive("r", r)?;
    require_non_negative("alpha", alpha)?;
    Ok(PairEnergy::exact(
        -T0_COEFFICIENT * alpha * alpha / r.powi(7),
        Route::RSpaceT0Closed,
    ))
}

/// `F = −(3/2π)·α²·∫₀^∞ (2ψ_D² + ψ_Δ²) dκ` by adaptive quadrature.
pub fn pair_energy_t0_numeric(r: f64, alpha: f64, tol: Tolerance) -> Result<PairEnergy> {
    require_positive("r", r)?;
    require_non_negative("alpha", alpha)?;
    if alpha == 0.0 {
        return Ok(PairEnergy::exact(0.0, Route::RSpaceT0Integral));
    }
    let res = zero_t_integral_scaled(
        |kappa| {
            r_space_kernels(r, ImagWavenumber::new(kappa).expect("quadrature nodes are non-negative"))
                .map(|k| 1.5 * alpha * alpha * k.orientational_square())
                .unwrap_or(f64::NAN)
        },
        1.0 / r,
        tol,
    )?;
    Ok(PairEnergy {
        value: -res.value,
        route: Route::RSpaceT0Integral,
        error_estimate: res.error_estimate,
        sum: None,
    })
}

/// Angular integral `∫dΩ_k ∫dΩ_k′ [(k̂·k̂′)² + 1]·e^{i(k+k′)·r}` reduced to
/// spherical Bessel functions:
///
/// `16π²·[(4/3)·j₀(kr)j₀(k′r) + (2/3)·j₂(kr)j₂(k′r)]`.
pub fn angular_reduction(k: f64, k_prime: f64, r: f64) -> f64 {
    let (a0, b0) = (spherical_j0(k * r), spherical_j0(k_prime * r));
    let (a2, b2) = (spherical_j2(k * r), spherical_j2(k_prime * r));
    16.0 * PI * PI * (4.0 / 3.0 * a0 * b0 + 2.0 / 3.0 * a2 * b2)
}

/// Closed forms of the damped radial moments `P_l(ξ, r) = ∫₀^∞ k³e^{−ξk} j_l(kr) dk`
/// for l = 0 and l = 2:
///
/// `P₀ = 2(3ξ² − r²)/(ξ² + r²)³`, `P₂ = 8r²/(ξ² + r²)³`.
pub fn laplace_moments(xi: f64, r: f64) -> (f64, f64) {
    let s = xi * xi + r * r;
    let s3 = s * s * s;
    (2.0 * (3.0 * xi * xi - r * r) / s3, 8.0 * r * r / s3)
}

/// `P₀(ξ, r)` and `P₂(ξ, r)` by numerical k-quadrature (half-period panels).
pub fn laplace_moments_numeric(xi: f64, r: f64, tol: Tolerance) -> Result<((f64, f64), f64)> {
    require_positive("xi", xi)?;
    require_positive("r", r)?;
    let integrator = OscillatoryIntegrator::new(tol);
    let half_period = PI / r;
    let p0 = integrator.integrate(0.0, half_period, |k| k.powi(3) * (-xi * k).exp() * spherical_j0(k * r))?;
    let p2 = integrator.integrate(0.0, half_period, |k| k.powi(3) * (-xi * k).exp() * spherical_j2(k * r))?;
    Ok(((p0.value, p2.value), p0.error_estimate + p2.error_estimate))
}

/// Smallest λ/r accepted by the k-space routes.
pub const MIN_LAMBDA_OVER_R: f64 = 1e-3;

/// Zero-temperature pair energy in k-space with damping `e^{−λ(k+k′)}`.
///
/// After the Matsubara sum, the T = 0 integrand is
/// `kk′/(k+k′)·e^{−λ(k+k′)}·[(k̂·k̂′)² + 1]·e^{i(k+k′)·r}` with prefactor
/// `−α²/(16π⁴)`. The angular integrals reduce to `j₀` and `j₂` (see
/// [`angular_reduction`]) and `e^{−λ(k+k′)}/(k+k′) = ∫_λ^∞ e^{−ξ(k+k′)} dξ`
/// factorizes the (k, k′) integral, giving
///
/// `F_λ(r) = −(α²/π²)·∫_λ^∞ [(4/3)P₀(ξ)² + (2/3)P₂(ξ)²] dξ`
///
/// with each `P_l` computed by numerical k-quadrature.
pub fn kspace_pair_energy(r: f64, alpha: f64, lambda: f64, tol: Tolerance) -> Result<PairEnergy> {
    require_positive("r", r)?;
    require_non_negative("alpha", alpha)?;
    require_positive("lambda", lambda)?;
    if lambda / r < MIN_LAMBDA_OVER_R {
        return Err(Error::InvalidInput(format!(
            "lambda/r = {} is below {MIN_LAMBDA_OVER_R}; the k-space quadrature cannot meet tolerance there",
            lambda / r
        )));
    }
    if alpha == 0.0 {
        return Ok(PairEnergy::exact(0.0, Route::KSpace));
    }
    let scale = r.powi(-4);
    let inner_tol = Tolerance::new(1e-3 * tol.rel.max(1e-13) * scale, 0.1 * tol.rel);
    let failure = std::cell::RefCell::new(None);
    let res = Integrator::new(tol)
        .breakpoints([r, 4.0 * r])
        .integrate_with_inner_error(Domain::semi_infinite_scaled(lambda, r), |xi| {
            match laplace_moments_numeric(xi, r, inner_tol) {
                Ok(((p0, p2), err)) => {
                    let v = 4.0 / 3.0 * p0 * p0 + 2.0 / 3.0 * p2 * p2;
                    let dv = (8.0 / 3.0 * p0.abs() + 4.0 / 3.0 * p2.abs()) * err;
                    (v, dv)
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    (f64::NAN, f64::INFINITY)
                }
            }
        });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let res = res?;
    let pref = alpha * alpha / (PI * PI);
    Ok(PairEnergy {
        value: -pref * res.value,
        route: Route::KSpace,
        error_estimate: pref * res.error_estimate,
        sum: None,
    })
}

/// λ → 0 limit of [`kspace_pair_energy`] by Richardson extrapolation in λ
/// (leading correction linear in λ).
pub fn kspace_pair_energy_extrapolated(
    r: f64,
    alpha: f64,
    lambdas: &[f64],
    tol: Tolerance,
) -> Result<(PairEnergy, Extrapolation)> {
    let samples = lambdas
        .iter()
        .map(|&l| kspace_pair_energy(r, alpha, l, tol).map(|e| (l, e.value)))
        .collect::<Result<Vec<_>>>()?;
    let ex = richardson_extrapolate(&samples, 1.0)?;
    Ok((
        PairEnergy {
            value: ex.limit,
            route: Route::KSpace,
            error_estimate: ex.error_estimate,
            sum: None,
        },
        ex,
    ))
}

/// Pair energy of the damped interaction using the closed-form moments
/// [`laplace_moments`]. Finite at r = 0, where the smeared contact term dominates.
pub fn smeared_pair_energy(r: f64, alpha: f64, lambda: f64, tol: Tolerance) -> Result<PairEnergy> {
    require_non_negative("r", r)?;
    require_positive("lambda", lambda)?;
    let scale = r.max(lambda);
    let res = Integrator::new(tol)
        .breakpoints([scale, 4.0 * scale])
        .integrate(Domain::semi_infinite_scaled(lambda, scale), |xi| {
            let (p0, p2) = laplace_moments(xi, r);
            4.0 / 3.0 * p0 * p0 + 2.0 / 3.0 * p2 * p2
        })?;
    let pref = alpha * alpha / (PI * PI);
    Ok(PairEnergy {
        value: -pref * res.value,
        route: Route::KSpace,
        error_estimate: pref * res.error_estimate,
        sum: None,
    })
}

/// T = 0 pair energy from the numerically transformed damped r-space kernels,
/// `F = −(3/2π)α²∫₀^∞ (2ψ_D^λ² + ψ_Δ^λ²) dκ`. Independent of the k-space route.
pub fn damped_rspace_pair_energy(r: f64, alpha: f64, lambda: f64, tol: Tolerance) -> Result<PairEnergy> {
    require_positive("r", r)?;
    require_positive("lambda", lambda)?;
    let kernel_tol = Tolerance::new(1e-3 * tol.rel * r.powi(-3), 0.1 * tol.rel);
    let failure = std::cell::RefCell::new(None);
    let res = Integrator::new(tol)
        .breakpoints([1.0 / r, 4.0 / r, 16.0 / r])
        .integrate_with_inner_error(Domain::semi_infinite_scaled(0.0, 1.0 / r), |kappa| {
            let k = ImagWavenumber::new(kappa).expect("non-negative node");
            match damped_r_space_kernels(r, k, lambda, kernel_tol) {
                Ok((p, err)) => (
                    p.orientational_square(),
                    (4.0 * p.psi_d.abs() + 2.0 * p.psi_delta.abs()) * err,
                ),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    (f64::NAN, f64::INFINITY)
                }
            }
        });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let res = res?;
    let pref = 1.5 * alpha * alpha / PI;
    Ok(PairEnergy {
        value: -pref * res.value,
        route: Route::DampedRSpace,
        error_estimate: pref * res.error_estimate,
        sum: None,
    })
}
