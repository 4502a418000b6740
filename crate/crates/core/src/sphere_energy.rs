//! Casimir energy of a dilute dielectric sphere assembled from pair energies.
//!
//! `Δ = (1/2)ρ²∫∫_V d³r₁d³r₂ F(|r₁ − r₂|)` is regularized either by a hard
//! core (pairs closer than `r_min` are excluded) or by damping every wave
//! number with `e^{−λk}`. The divergent coefficients depend on the scheme; the
//! positive `1/a` term does not, and equals `23(ε−1)²/(1536πa)` in units of ħc.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::geometry::{pair_measure_integral, pair_measure_integral_refined, sphere_form_factor, SphereSpec};
use crate::matsubara::ThermalState;
use crate::numerics::{integrate_box, linear_fit, Domain, Integrator, QuadratureResult, Tolerance};
use crate::pair_energy::{laplace_moments, pair_free_energy, Medium, T0_COEFFICIENT};

/// Relative disagreement between the fitted and analytic finite parts above
/// which a hard-core sweep fails.
pub const FINITE_PART_AGREEMENT: f64 = 1e-2;

/// Largest relative fit residual accepted by [`decompose_fit`].
pub const FIT_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum Cutoff {
    HardCore { r_min: f64 },
    Exponential { lambda: f64 },
}

impl Cutoff {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Cutoff::HardCore { r_min } => require_positive("r_min", r_min),
            Cutoff::Exponential { lambda } => require_positive("lambda", lambda),
        }
    }
}

impl std::str::FromStr for Cutoff {
    type Err = Error;

    /// Parses `hardcore:<r_min>` or `exp:<lambda>`.
    fn from_str(s: &str) -> Result<Self> {
        let (scheme, value) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("cutoff '{s}' is not of the form scheme:value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cutoff value '{value}' is not a number")))?;
        let cutoff = match scheme.trim() {
            "hardcore" | "hard-core" => Cutoff::HardCore { r_min: value },
            "exp" | "exponential" => Cutoff::Exponential { lambda: value },
            other => return Err(Error::InvalidInput(format!("unknown cutoff scheme '{other}'"))),
        };
        cutoff.validate()?;
        Ok(cutoff)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCoefficient {
    pub name: String,
    pub value: f64,
}

/// Divergent and finite parts of the sphere energy.
///
/// For the hard core, `total = c_vol/r_min⁴ + c_surf/r_min³ + c_lin/r_min + finite_1_over_a`.
/// For the exponential scheme the same fields hold the coefficients of
/// `λ⁻⁴`, `λ⁻³` and `λ⁻¹`; the `λ⁻²` coefficient and any positive powers
/// are listed in `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub total_error: f64,
    pub c_vol: f64,
    pub c_surf: f64,
    pub c_lin: f64,
    pub finite_1_over_a: f64,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<NamedCoefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
}

impl EnergyBreakdown {
    /// Hard-core model evaluated at `r_min`.
    pub fn hardcore_model(&self, r_min: f64) -> f64 {
        self.c_vol / r_min.powi(4) + self.c_surf / r_min.powi(3) + self.c_lin / r_min + self.finite_1_over_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DielectricState {
    pub epsilon: f64,
    pub n_refr: f64,
    pub gamma: f64,
}

/// Solves `(ε−1)/((1−Θ)ε + (2+Θ)) = (4π/3)ρα` for ε.
pub fn epsilon_relation(medium: &Medium) -> Result<DielectricState> {
    let theta = medium.theta.value();
    let y = 4.0 * PI / 3.0 * medium.rho * medium.alpha;
    let denominator = 1.0 - y * (1.0 - theta);
    if !(denominator > 0.0) {
        return Err(Error::NoPhysicalSolution(format!(
            "(4π/3)ρα = {y} with Θ = {theta} leaves no ε ≥ 1 (1 − y(1−Θ) = {denominator})"
        )));
    }
    let epsilon = (1.0 + y * (2.0 + theta)) / denominator;
    if !(epsilon >= 1.0) {
        return Err(Error::NoPhysicalSolution(format!("ε = {epsilon} < 1")));
    }
    Ok(DielectricState {
        epsilon,
        n_refr: epsilon.sqrt(),
        gamma: medium.gamma(),
    })
}

/// Predicted finite part `23(ε−1)²/(1536πa)` with ε − 1 = 4πρα.
pub fn finite_part_prediction(a: f64, medium: &Medium) -> f64 {
    let eps_minus_one = medium.gamma();
    23.0 * eps_minus_one * eps_minus_one / (1536.0 * PI * a)
}

/// Exact hard-core decomposition. `4πr²V_ov·r⁻⁷` is a sum of `r⁻⁵`, `r⁻⁴` and
/// `r⁻²` terms, so the energy has no terms beyond the four below.
pub fn hardcore_coefficients(a: f64, medium: &Medium) -> EnergyBreakdown {
    let c = T0_COEFFICIENT * medium.alpha * medium.alpha;
    let k = PI * PI / 6.0 * medium.rho * medium.rho * c;
    EnergyBreakdown {
        total: f64::NAN,
        total_error: 0.0,
        c_vol: -4.0 * k * a.powi(3),
        c_surf: 4.0 * k * a * a,
        c_lin: -k,
        finite_1_over_a: k / (4.0 * a),
        residual: 0.0,
        extra: Vec::new(),
        condition_number: None,
    }
}

/// Hard-core sphere energy at T = 0: quadrature of the pair law over the
/// pair-distance measure, decomposed analytically.
pub fn sphere_energy_rspace(a: f64, medium: &Medium, r_min: f64, tol: Tolerance) -> Result<EnergyBreakdown> {
    SphereSpec::new(a)?;
    require_positive("r_min", r_min)?;
    let c = T0_COEFFICIENT * medium.alpha * medium.alpha;
    let half_rho2 = 0.5 * medium.rho * medium.rho;
    let quad = pair_measure_integral(|r| -c / r.powi(7), a, r_min, tol)?;
    let mut out = hardcore_coefficients(a, medium);
    out.total = half_rho2 * quad.value;
    out.total_error = half_rho2 * quad.error_estimate;
    let analytic = out.hardcore_model(r_min);
    out.residual = (out.total - analytic).abs();
    // the four terms cancel strongly as r_min → 2a, so bound by their magnitudes
    let magnitude = out.c_vol.abs() / r_min.powi(4)
        + out.c_surf.abs() / r_min.powi(3)
        + out.c_lin.abs() / r_min
        + out.finite_1_over_a.abs();
    let allowed = 10.0 * out.total_error + 1e-12 * magnitude;
    if out.residual > allowed {
        return Err(Error::RouteDisagreement {
            analytic,
            fitted: out.total,
        });
    }
    Ok(out)
}

/// Hard-core sphere energy with the finite-temperature pair energy.
///
/// There is no reference value for this quantity; results are not validated.
pub fn sphere_energy_rspace_thermal(
    a: f64,
    medium: &Medium,
    r_min: f64,
    state: &ThermalState,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    SphereSpec::new(a)?;
    require_positive("r_min", r_min)?;
    let unit = Medium::new(medium.alpha, 0.0)?;
    let failure = std::cell::RefCell::new(None);
    let quad = crate::geometry::pair_measure_integral_with_inner_error(
        |r| match pair_free_energy(r, &unit, state) {
            Ok(e) => (e.value, e.error_estimate),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                (f64::NAN, f64::INFINITY)
            }
        },
        a,
        r_min,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let quad = quad?;
    let half_rho2 = 0.5 * medium.rho * medium.rho;
    Ok(QuadratureResult {
        value: half_rho2 * quad.value,
        error_estimate: half_rho2 * quad.error_estimate,
        cells_evaluated: quad.cells_evaluated,
    })
}

/// Least-squares fit of `total(r_min) = c_vol/r_min⁴ + c_surf/r_min³ + c_lin/r_min + f`
/// over samples `(r_min, total)`, done in the scaled variable `x = r_min/a`
/// with relative weights.
///
/// `total` in the result is the sample at the smallest `r_min`.
pub fn decompose_fit(samples: &[(f64, f64)], a: f64) -> Result<EnergyBreakdown> {
    require_positive("a", a)?;
    if samples.len() < 6 {
        return Err(Error::InvalidInput(format!(
            "decomposition needs at least 6 samples, got {}",
            samples.len()
        )));
    }
    for &(r, t) in samples {
        require_positive("r_min", r)?;
        if !t.is_finite() || t == 0.0 {
            return Err(Error::InvalidInput(format!("sample total {t} at r_min = {r} is unusable")));
        }
    }
    let design: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(r, _)| {
            let x = r / a;
            vec![x.powi(-4), x.powi(-3), x.recip(), 1.0]
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|&(_, t)| t).collect();
    let w: Vec<f64> = y.iter().map(|t| t.abs().recip()).collect();
    let fit = linear_fit(&design, &y, Some(&w))?;

    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(r, _)| (lo.min(r), hi.max(r)));
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!(
            "r_min samples span {:.3} decades; at least 2 are required",
            (hi / lo).log10()
        )));
    }
    if hi > 0.1 * a * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "r_min = {hi} is not small compared to a = {a}"
        )));
    }
    if fit.max_relative_residual > FIT_RESIDUAL_TOLERANCE {
        return Err(Error::FitResidual {
            residual: fit.max_relative_residual,
            tolerance: FIT_RESIDUAL_TOLERANCE,
        });
    }
    let c = &fit.coefficients;
    let smallest = samples
        .iter()
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .expect("non-empty");
    Ok(EnergyBreakdown {
        total: smallest.1,
        total_error: 0.0,
        c_vol: c[0] * a.powi(4),
        c_surf: c[1] * a.powi(3),
        c_lin: c[2] * a,
        finite_1_over_a: c[3],
        residual: fit.max_relative_residual,
        extra: Vec::new(),
        condition_number: Some(fit.condition_number),
    })
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    // base 10 so decade points come out exact; endpoints pinned
    let (l0, l1) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64),
        })
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let m = (n - 1) as f64;
    (0..n).map(|i| (lo * (m - i as f64) + hi * i as f64) / m).collect()
}

/// Default hard-core sweep: 9 values of `r_min/a` from 10⁻⁴ to 10⁻².
pub fn default_rmin_grid(a: f64) -> Vec<f64> {
    log_grid(1e-4 * a, 1e-2 * a, 9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub cutoff: f64,
    pub breakdown: EnergyBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardcoreSweep {
    pub samples: Vec<SweepSample>,
    pub fitted: EnergyBreakdown,
    pub analytic: EnergyBreakdown,
    pub finite_relative_disagreement: f64,
}

/// Hard-core energies over `r_mins` (computed concurrently, returned in input
/// order), decomposed by [`decompose_fit`] and checked against the analytic
/// decomposition.
pub fn hardcore_sweep(a: f64, medium: &Medium, r_mins: &[f64], tol: Tolerance) -> Result<HardcoreSweep> {
    let samples = r_mins
        .par_iter()
        .map(|&r| sphere_energy_rspace(a, medium, r, tol).map(|b| SweepSample { cutoff: r, breakdown: b }))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.cutoff, s.breakdown.total)).collect();
    let fitted = decompose_fit(&pairs, a)?;
    let analytic = hardcore_coefficients(a, medium);
    let disagreement = (fitted.finite_1_over_a - analytic.finite_1_over_a).abs() / analytic.finite_1_over_a.abs();
    if !(disagreement <= FINITE_PART_AGREEMENT) {
        return Err(Error::RouteDisagreement {
            analytic: analytic.finite_1_over_a,
            fitted: fitted.finite_1_over_a,
        });
    }
    Ok(HardcoreSweep {
        samples,
        fitted,
        analytic,
        finite_relative_disagreement: disagreement,
    })
}

/// `G(r, λ) = ∫_λ^∞ [(4/3)P₀² + (2/3)P₂²] dξ`, so that the damped pair energy
/// is `−(α²/π²)·G`.
fn smeared_kernel(r: f64, lambda: f64, tol: Tolerance) -> Result<QuadratureResult> {
    let scale = r.max(lambda);
    Integrator::new(tol)
        .breakpoints([scale, 4.0 * scale])
        .integrate(Domain::semi_infinite_scaled(lambda, scale), |xi| {
            let (p0, p2) = laplace_moments(xi, r);
            4.0 / 3.0 * p0 * p0 + 2.0 / 3.0 * p2 * p2
        })
}

/// Tightest relative tolerance used by [`sphere_energy_exponential`]; the
/// nested integrand's own roundoff sits just below it.
pub const EXPONENTIAL_MIN_REL_TOL: f64 = 1e-13;

/// Sphere energy with exponential damping `e^{−λk}` at T = 0, evaluated in r-space
/// with the damped pair energy (smeared contact term included).
pub fn sphere_energy_exponential(a: f64, medium: &Medium, lambda: f64, tol: Tolerance) -> Result<QuadratureResult> {
    SphereSpec::new(a)?;
    require_positive("lambda", lambda)?;
    let tol = Tolerance::new(tol.abs, tol.rel.max(EXPONENTIAL_MIN_REL_TOL));
    let inner_tol = tol.tightened(0.1);
    let failure = std::cell::RefCell::new(None);
    let quad = pair_measure_integral_refined(
        |r| match smeared_kernel(r, lambda, inner_tol) {
            Ok(q) => (q.value, q.error_estimate),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                (f64::NAN, f64::INFINITY)
            }
        },
        a,
        0.0,
        lambda / 4.0,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let quad = quad?;
    let pref = -0.5 * medium.rho * medium.rho * medium.alpha * medium.alpha / (PI * PI);
    Ok(QuadratureResult {
        value: pref * quad.value,
        error_estimate: pref.abs() * quad.error_estimate,
        cells_evaluated: quad.cells_evaluated,
    })
}

/// Powers p of `λ/a` in the exponential-scheme model `Δ·a = Σ_p d_p (λ/a)^p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentialBasis {
    pub powers: Vec<i32>,
}

impl ExponentialBasis {
    /// The volume, surface, curvature and `1/λ` divergences plus the constant.
    pub fn divergences_only() -> Self {
        Self {
            powers: vec![-4, -3, -2, -1, 0],
        }
    }

    fn validate(&self) -> Result<()> {
        let mut seen = self.powers.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.powers.len() || !self.powers.contains(&0) {
            return Err(Error::InvalidInput(
                "exponential basis needs distinct powers including 0".into(),
            ));
        }
        Ok(())
    }
}

impl Default for ExponentialBasis {
    /// Divergences plus `λ`, `λ²` and `λ³` corrections; without them the
    /// finite part absorbs the O(λ) remainder over a practical λ window.
    fn default() -> Self {
        Self {
            powers: vec![-4, -3, -2, -1, 0, 1, 2, 3],
        }
    }
}

impl std::str::FromStr for ExponentialBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let powers = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::InvalidInput(format!("basis power '{p}' is not an integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = Self { powers };
        basis.validate()?;
        Ok(basis)
    }
}

/// Default λ window for the exponential sweep: 15 evenly spaced values of λ/a in [0.05, 0.4].
pub fn default_lambda_grid(a: f64) -> Vec<f64> {
    linear_grid(0.05 * a, 0.4 * a, 15)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSweep {
    pub samples: Vec<SweepSample>,
    pub fitted: EnergyBreakdown,
    pub basis: ExponentialBasis,
}

/// Fit of the exponential-scheme energy over a sample set `(λ, Δ)`.
pub fn decompose_exponential_fit(samples: &[(f64, f64)], a: f64, basis: &ExponentialBasis) -> Result<EnergyBreakdown> {
    require_positive("a", a)?;
    basis.validate()?;
    for &(l, t) in samples {
        require_positive("lambda", l)?;
        if !t.is_finite() || t == 0.0 {
            return Err(Error::InvalidInput(format!("sample total {t} at lambda = {l} is unusable")));
        }
    }
    let design: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(l, _)| basis.powers.iter().map(|&p| (l / a).powi(p) / a).collect())
        .collect();
    let y: Vec<f64> = samples.iter().map(|&(_, t)| t).collect();
    let w: Vec<f64> = y.iter().map(|t| t.abs().recip()).collect();
    let fit = linear_fit(&design, &y, Some(&w))?;

    // d_p (λ/a)^p / a  ⇒  coefficient of λ^p is d_p·a^{−p−1}
    let coefficient = |p: i32| -> f64 {
        basis
            .powers
            .iter()
            .position(|&q| q == p)
            .map_or(0.0, |i| fit.coefficients[i] * a.powi(-p - 1))
    };
    let extra = basis
        .powers
        .iter()
        .filter(|p| ![-4, -3, -1, 0].contains(*p))
        .map(|&p| NamedCoefficient {
            name: format!("lambda^{p}"),
            value: coefficient(p),
        })
        .collect();
    let smallest = samples
        .iter()
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .expect("fit succeeded so samples are non-empty");
    Ok(EnergyBreakdown {
        total: smallest.1,
        total_error: 0.0,
        c_vol: coefficient(-4),
        c_surf: coefficient(-3),
        c_lin: coefficient(-1),
        finite_1_over_a: coefficient(0),
        residual: fit.max_relative_residual,
        extra,
        condition_number: Some(fit.condition_number),
    })
}

/// Exponential-scheme energies over `lambdas` (concurrently, input order kept)
/// and their decomposition.
pub fn exponential_sweep(
    a: f64,
    medium: &Medium,
    lambdas: &[f64],
    basis: &ExponentialBasis,
    tol: Tolerance,
) -> Result<ExponentialSweep> {
    basis.validate()?;
    let samples = lambdas
        .par_iter()
        .map(|&l| {
            sphere_energy_exponential(a, medium, l, tol).map(|q| SweepSample {
                cutoff: l,
                breakdown: EnergyBreakdown {
                    total: q.value,
                    total_error: q.error_estimate,
                    c_vol: f64::NAN,
                    c_surf: f64::NAN,
                    c_lin: f64::NAN,
                    finite_1_over_a: f64::NAN,
                    residual: f64::NAN,
                    extra: Vec::new(),
                    condition_number: None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.cutoff, s.breakdown.total)).collect();
    let fitted = decompose_exponential_fit(&pairs, a, basis)?;
    Ok(ExponentialSweep {
        samples,
        fitted,
        basis: basis.clone(),
    })
}

/// Sphere energy with exponential damping computed in k-space:
///
/// `Δ = −γ²/(2(16π³)²)·∫d³k d³k′ kk′e^{−λ(k+k′)}/(k+k′)·[(k̂·k̂′)² + 1]·|Ṽ(|k+k′|)|²`.
///
/// With `u = k + k′`, `v = k − k′` and `q = |k + k′|` this becomes
///
/// `−γ²/(64π⁴)·∫₀^∞ du e^{−λu}/u ∫₀^u dq q|Ṽ(q)|² ∫₀^q dv [(u²−v²)² + (2q²−u²−v²)²]/16`,
///
/// integrated over the unit cube after `q = us`, `v = qt`.
pub fn sphere_energy_kspace(a: f64, medium: &Medium, lambda: f64, tol: Tolerance) -> Result<QuadratureResult> {
    SphereSpec::new(a)?;
    require_positive("lambda", lambda)?;
    if lambda / a < 1e-2 {
        return Err(Error::InvalidInput(format!(
            "lambda/a = {} is below 1e-2; the k-space integrand spans too many decades",
            lambda / a
        )));
    }
    let gamma = medium.gamma();
    if gamma == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            cells_evaluated: 0,
        });
    }
    let f = |p: &[f64]| {
        let (u, s, t) = (p[0], p[1], p[2]);
        let q = u * s;
        let v = q * t;
        let form = sphere_form_factor(q, a).unwrap_or(f64::NAN);
        let (u2, v2, q2) = (u * u, v * v, q * q);
        let a1 = u2 - v2;
        let a2 = 2.0 * q2 - u2 - v2;
        let poly = (a1 * a1 + a2 * a2) / 16.0;
        // du/u · (u ds) q · (q dt)
        (-lambda * u).exp() * q * q * form * form * poly
    };
    let domains = [
        Domain::semi_infinite_scaled(0.0, 4.0 / lambda),
        Domain::finite(0.0, 1.0),
        Domain::finite(0.0, 1.0),
    ];
    let res = integrate_box(f, &domains, tol)?;
    let pref = -gamma * gamma / (64.0 * PI.powi(4));
    Ok(QuadratureResult {
        value: pref * res.value,
        error_estimate: pref.abs() * res.error_estimate,
        cells_evaluated: res.cells_evaluated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergy {
    /// `Δ₁ = −γ·(3/(2π²))·V/λ⁴`.
    pub closed: f64,
    /// `Δ₁` from the numerically integrated `Σ_K ψ_Δ(0)`.
    pub numeric: f64,
    pub numeric_error: f64,
    /// `(1/β)·Σ_K ψ_Δ(0)` at T → 0, which is `4/(πλ⁴)`.
    pub kernel_sum: f64,
}

/// First-order self-energy of the particles in volume `v`. It belongs to the
/// isolated particles and is never part of an [`EnergyBreakdown`].
pub fn self_energy(v: f64, gamma: f64, lambda: f64, tol: Tolerance) -> Result<SelfEnergy> {
    require_non_negative("volume", v)?;
    require_non_negative("gamma", gamma)?;
    require_positive("lambda", lambda)?;
    let closed = -gamma * 3.0 / (2.0 * PI * PI) * v / lambda.powi(4);
    if lambda.is_infinite() {
        return Ok(SelfEnergy {
            closed,
            numeric: 0.0,
            numeric_error: 0.0,
            kernel_sum: 0.0,
        });
    }
    // (4π/3)·(2π)⁻³·∫ k e^{−λk} d³k, the d³k integral taken radially
    let radial = Integrator::new(tol).integrate(Domain::semi_infinite_scaled(0.0, 1.0 / lambda), |k| {
        4.0 * PI * k.powi(3) * (-lambda * k).exp()
    })?;
    let pref = 4.0 * PI / 3.0 / (2.0 * PI).powi(3);
    let kernel_sum = pref * radial.value;
    // Δ₁ = −(1/2)ρV·(3α)·(1/β)Σ_K ψ_Δ(0), with ρα = γ/(4π)
    let to_energy = -1.5 * gamma / (4.0 * PI) * v;
    Ok(SelfEnergy {
        closed,
        numeric: to_energy * kernel_sum,
        numeric_error: to_energy.abs() * pref * radial.error_estimate,
        kernel_sum,
    })
}
