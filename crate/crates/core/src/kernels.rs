//! Radiating dipole–dipole interaction amplitudes on the imaginary frequency axis.
//!
//! The interaction between two fluctuating dipoles at Matsubara wavenumber κ
//! is split into two radial amplitudes multiplying the orientational tensors
//! `D = 3(r̂·â₁)(r̂·â₂) − â₁·â₂` and `Δ = â₁·â₂`. In k-space the same split is
//! taken along k̂. Natural units ħ = c = 1 are used throughout, so κ and k are
//! both inverse lengths.
//!
//! The contact weight Θ only enters through the constant `(2+Θ)` in the Δ
//! amplitude. Energies are always evaluated at Θ = −2, where that term (a
//! delta function at r = 0) vanishes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::numerics::special::{spherical_j0, spherical_j2};
use crate::numerics::{OscillatoryIntegrator, QuadratureResult, Tolerance};

/// Imaginary wavenumber κ = |K|/(ħc) of a Matsubara term.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ImagWavenumber(f64);

impl ImagWavenumber {
    pub fn new(kappa: f64) -> Result<Self> {
        require_non_negative("kappa", kappa)?;
        Ok(Self(kappa))
    }

    /// κₙ = 2π|n|/β for Matsubara index `n` at inverse temperature β (in 1/length).
    pub fn matsubara(n: i64, beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        Ok(Self(2.0 * PI * n.unsigned_abs() as f64 / beta))
    }

    pub fn static_limit() -> Self {
        Self(0.0)
    }

    pub fn kappa(self) -> f64 {
        self.0
    }
}

/// Contact-term weight Θ of the k-space Δ amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParameter(pub f64);

impl ThetaParameter {
    /// Θ = −2: the longitudinal part of the interaction vanishes.
    pub const TRANSVERSE: ThetaParameter = ThetaParameter(-2.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_transverse(self) -> bool {
        self.0 == -2.0
    }
}

impl Default for ThetaParameter {
    fn default() -> Self {
        Self::TRANSVERSE
    }
}

/// Radial amplitudes `(ψ_D, ψ_Δ)` at one imaginary wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPair {
    pub psi_d: f64,
    pub psi_delta: f64,
}

impl KernelPair {
    /// Orientational average of the squared interaction, up to a factor 1/3:
    /// `2ψ_D² + ψ_Δ²`.
    pub fn orientational_square(&self) -> f64 {
        2.0 * self.psi_d * self.psi_d + self.psi_delta * self.psi_delta
    }

    pub fn eigencouplings(&self) -> CouplingEigenvalues {
        CouplingEigenvalues {
            f_par: 2.0 * self.psi_d + self.psi_delta,
            f_perp: self.psi_delta - self.psi_d,
        }
    }

    /// Longitudinal combination `(ψ_Δ + 2ψ_D)/3`.
    pub fn longitudinal(&self) -> f64 {
        (self.psi_delta + 2.0 * self.psi_d) / 3.0
    }

    /// Transverse combination `(ψ_Δ − ψ_D)/3`.
    pub fn transverse(&self) -> f64 {
        (self.psi_delta - self.psi_d) / 3.0
    }
}

/// Coupling for parallel dipoles along r̂ (`f_par`) and perpendicular to it (`f_perp`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEigenvalues {
    pub f_par: f64,
    pub f_perp: f64,
}

impl CouplingEigenvalues {
    /// `f_par² + 2·f_perp²`, equal to `3(2ψ_D² + ψ_Δ²)`.
    pub fn trace_of_square(&self) -> f64 {
        self.f_par * self.f_par + 2.0 * self.f_perp * self.f_perp
    }
}

/// Fourier-space amplitudes `(ψ̃_D, ψ̃_Δ)` with exponential damping `e^{−λk}`.
///
/// `k²/(k² − ω²)` on the imaginary axis becomes `k²/(k² + κ²)`.
pub fn k_space_kernels(
    k: f64,
    kappa: ImagWavenumber,
    theta: ThetaParameter,
    lambda: f64,
) -> Result<KernelPair> {
    require_positive("k", k)?;
    require_finite("theta", theta.0)?;
    require_non_negative("lambda", lambda)?;
    let kk = kappa.kappa();
    let ratio = k * k / (k * k + kk * kk);
    let damping = (-lambda * k).exp();
    let c = 4.0 * PI / 3.0;
    Ok(KernelPair {
        psi_d: -c * ratio * damping,
        psi_delta: c * (2.0 * ratio - (2.0 + theta.0)) * damping,
    })
}

/// Closed-form r-space amplitudes at Θ = −2 (contact term removed):
///
/// `ψ_D = (1 + x + x²/3)·e^{−x}/r³`, `ψ_Δ = −(2/3)·κ²·e^{−x}/r`, with `x = κr`.
pub fn r_space_kernels(r: f64, kappa: ImagWavenumber) -> Result<KernelPair> {
    require_positive("r", r)?;
    let k = kappa.kappa();
    let x = k * r;
    let decay = (-x).exp();
    Ok(KernelPair {
        psi_d: (1.0 + x + x * x / 3.0) * decay / (r * r * r),
        psi_delta: -(2.0 / 3.0) * k * k * decay / r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelComponent {
    D,
    Delta,
}

/// Default absolute tolerance of the inverse-transform oracle, applied to the
/// dimensionless radial integral.
pub const ORACLE_DEFAULT_TOLERANCE: f64 = 1e-6;

/// Numerical inverse Fourier transform of the k-space amplitudes (Θ = −2, no damping).
///
/// The Δ amplitude is a spherical (order-0) transform; D carries the
/// `3k̂k̂ − 1` tensor and therefore an order-2 transform with a sign flip:
///
/// `ψ_Δ(r) = (1/2π²)∫ψ̃_Δ j₀(kr) k² dk`, `ψ_D(r) = −(1/2π²)∫ψ̃_D j₂(kr) k² dk`.
///
/// Writing `k²/(k²+κ²) = 1 − κ²/(k²+κ²)`, the constant part transforms to the
/// static dipole field (`1/r³` for D; a delta at the origin for Δ) and the rest
/// is integrated numerically over half-period panels with epsilon acceleration.
/// `tol` is the absolute tolerance on the dimensionless integral
/// `∫ x²/(x²+x₀²) j_l(x) dx`.
pub fn oracle_inverse_transform(
    kappa: ImagWavenumber,
    r: f64,
    component: KernelComponent,
    tol: f64,
) -> Result<QuadratureResult> {
    require_positive("r", r)?;
    require_positive("tol", tol)?;
    let k = kappa.kappa();
    let x0 = k * r;
    let static_part = match component {
        KernelComponent::D => 1.0 / (r * r * r),
        KernelComponent::Delta => 0.0,
    };
    if x0 == 0.0 {
        return Ok(QuadratureResult {
            value: static_part,
            error_estimate: 0.0,
            cells_evaluated: 0,
        });
    }
    let x0_sq = x0 * x0;
    let integrator = OscillatoryIntegrator::new(Tolerance::absolute(tol * 0.5));
    let (integral, prefactor) = match component {
        KernelComponent::D => (
            integrator.integrate(0.0, PI, |x| x * x / (x * x + x0_sq) * spherical_j2(x))?,
            -(2.0 / (3.0 * PI)) * k * k / r,
        ),
        KernelComponent::Delta => (
            integrator.integrate(0.0, PI, |x| x * x / (x * x + x0_sq) * spherical_j0(x))?,
            -(4.0 / (3.0 * PI)) * k * k / r,
        ),
    };
    if integral.error_estimate > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: integral.error_estimate,
        });
    }
    Ok(QuadratureResult {
        value: static_part + prefactor * integral.value,
        error_estimate: prefactor.abs() * integral.error_estimate,
        cells_evaluated: integral.cells_evaluated,
    })
}

/// r-space amplitudes of the damped kernels `ψ̃·e^{−λk}` at Θ = −2, by numerical
/// inverse transform. Unlike [`r_space_kernels`] the Δ amplitude keeps the
/// smeared contact term, which no longer vanishes at r > 0 once λ > 0.
pub fn damped_r_space_kernels(
    r: f64,
    kappa: ImagWavenumber,
    lambda: f64,
    tol: Tolerance,
) -> Result<(KernelPair, f64)> {
    require_positive("r", r)?;
    require_positive("lambda", lambda)?;
    let k2 = kappa.kappa() * kappa.kappa();
    let half_period = PI / r;
    let integrator = OscillatoryIntegrator::new(tol);
    let weight = |q: f64| q.powi(4) / (q * q + k2) * (-lambda * q).exp();
    let d = integrator.integrate(0.0, half_period, |q| weight(q) * spherical_j2(q * r))?;
    let delta = integrator.integrate(0.0, half_period, |q| weight(q) * spherical_j0(q * r))?;
    let cd = 2.0 / (3.0 * PI);
    let cdelta = 4.0 / (3.0 * PI);
    Ok((
        KernelPair {
            psi_d: cd * d.value,
            psi_delta: cdelta * delta.value,
        },
        cd * d.error_estimate + cdelta * delta.error_estimate,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn kappa(k: f64) -> ImagWavenumber {
        ImagWavenumber::new(k).unwrap()
    }

    #[test]
    fn k_space_static_limit() {
        let p = k_space_kernels(1.0, kappa(0.0), ThetaParameter::TRANSVERSE, 0.0).unwrap();
        assert_relative_eq!(p.psi_d, -4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(p.psi_delta, 8.0 * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn k_space_half_ratio() {
        let p = k_space_kernels(1.0, kappa(1.0), ThetaParameter::TRANSVERSE, 0.0).unwrap();
        assert_relative_eq!(p.psi_d, -2.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(p.psi_delta, 4.0 * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn k_space_damping_multiplies_static_value() {
        let p = k_space_kernels(1.0, kappa(0.0), ThetaParameter::TRANSVERSE, 1.0).unwrap();
        let direct = -(4.0 * PI / 3.0) * (-1.0f64).exp();
        assert_relative_eq!(p.psi_d, direct, max_relative = 1e-15);
        assert_relative_eq!(p.psi_d, -1.540_970, max_relative = 1e-6);
    }

    #[test]
    fn k_space_rejects_bad_input() {
        assert!(k_space_kernels(0.0, kappa(1.0), ThetaParameter::TRANSVERSE, 0.0).is_err());
        assert!(k_space_kernels(f64::NAN, kappa(1.0), ThetaParameter::TRANSVERSE, 0.0).is_err());
        assert!(k_space_kernels(1.0, kappa(1.0), ThetaParameter(f64::INFINITY), 0.0).is_err());
        assert!(ImagWavenumber::new(-1.0).is_err());
    }

    #[test]
    fn r_space_examples() {
        let p = r_space_kernels(1.0, kappa(0.0)).unwrap();
        assert_eq!((p.psi_d, p.psi_delta), (1.0, 0.0));
        let p = r_space_kernels(1.0, kappa(1.0)).unwrap();
        assert_relative_eq!(p.psi_d, 0.858_385, max_relative = 1e-6);
        assert_relative_eq!(p.psi_delta, -0.245_253, max_relative = 2e-6);
        let p = r_space_kernels(1.0, kappa(2.0)).unwrap();
        assert_relative_eq!(p.psi_d, 0.586_453, max_relative = 1e-6);
        assert_relative_eq!(p.psi_delta, -0.360_894, max_relative = 2e-6);
        assert!(r_space_kernels(0.0, kappa(1.0)).is_err());
        assert!(r_space_kernels(-1.0, kappa(1.0)).is_err());
    }

    #[test]
    fn oracle_examples() {
        let d = oracle_inverse_transform(kappa(1.0), 1.0, KernelComponent::D, 1e-9).unwrap();
        assert!((d.value - 0.858_385).abs() < 1e-4);
        let z = oracle_inverse_transform(kappa(0.0), 1.0, KernelComponent::Delta, 1e-9).unwrap();
        assert_eq!(z.value, 0.0);
        let tiny = oracle_inverse_transform(kappa(1e-9), 1.0, KernelComponent::Delta, 1e-9).unwrap();
        assert!(tiny.value.abs() < 1e-15);
        let dl = oracle_inverse_transform(kappa(1.0), 2.0, KernelComponent::Delta, 1e-10).unwrap();
        assert_relative_eq!(dl.value, -(2.0 / 3.0) * (-2.0f64).exp() / 2.0, max_relative = 1e-6);
        assert_relative_eq!(dl.value, -0.045_111_8, max_relative = 1e-5);
    }

    #[test]
    fn eigencoupling_identity_example() {
        let p = r_space_kernels(0.7, kappa(1.3)).unwrap();
        let e = p.eigencouplings();
        assert_relative_eq!(e.trace_of_square(), 3.0 * p.orientational_square(), max_relative = 1e-15);
    }

    #[test]
    fn damped_kernels_converge_linearly_in_lambda() {
        // the smeared contact term and the damping both shift the amplitudes by O(λ/r⁴)
        let tol = Tolerance::new(1e-12, 1e-10);
        let exact = r_space_kernels(2.0, kappa(0.5)).unwrap();
        let shift = |lambda: f64| {
            let (p, _) = damped_r_space_kernels(2.0, kappa(0.5), lambda, tol).unwrap();
            (p.psi_d - exact.psi_d, p.psi_delta - exact.psi_delta)
        };
        let (d1, l1) = shift(0.02);
        let (d2, l2) = shift(0.01);
        assert!(d1.abs() < 0.05 * exact.psi_d.abs());
        assert!(l1.abs() < 0.05 * exact.psi_delta.abs());
        assert!((d1 / d2 - 2.0).abs() < 0.2, "ratio {}", d1 / d2);
        assert!((l1 / l2 - 2.0).abs() < 0.2, "ratio {}", l1 / l2);
    }

    proptest! {
        #[test]
        fn longitudinal_part_vanishes(k in 1e-3f64..1e3, kap in 0.0f64..1e3, lambda in 0.0f64..2.0) {
            let p = k_space_kernels(k, kappa(kap), ThetaParameter::TRANSVERSE, lambda).unwrap();
            prop_assert!(p.longitudinal().abs() <= 1e-15 * p.psi_delta.abs().max(1e-300));
        }

        #[test]
        fn transverse_closed_form(k in 1e-3f64..1e3, kap in 0.0f64..1e3) {
            let p = k_space_kernels(k, kappa(kap), ThetaParameter::TRANSVERSE, 0.0).unwrap();
            let expected = 4.0 * PI / 3.0 * k * k / (k * k + kap * kap);
            prop_assert!((p.transverse() - expected).abs() <= 1e-14 * expected.abs());
        }

        #[test]
        fn casimir_polder_polynomial(r in 0.05f64..20.0, x in 0.0f64..30.0) {
            let p = r_space_kernels(r, kappa(x / r)).unwrap();
            let lhs = 1.5 * p.orientational_square() * r.powi(6);
            let rhs = (-2.0 * x).exp() * (3.0 + 6.0 * x + 5.0 * x * x + 2.0 * x.powi(3) + x.powi(4));
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }

        #[test]
        fn eigencoupling_identity(r in 0.05f64..20.0, x in 0.0f64..50.0) {
            let p = r_space_kernels(r, kappa(x / r)).unwrap();
            let lhs = p.eigencouplings().trace_of_square();
            let rhs = 3.0 * p.orientational_square();
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs);
        }

        #[test]
        fn kernels_decay_with_kappa_r(r in 0.1f64..5.0, x in 20.0f64..40.0) {
            let p = r_space_kernels(r, kappa(x / r)).unwrap();
            let envelope = (-x).exp() * x * x / r.powi(3);
            prop_assert!(p.psi_d.abs() <= envelope);
            prop_assert!(p.psi_delta.abs() <= envelope);
        }
    }
}
