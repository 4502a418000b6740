//! Sums over the bosonic Matsubara grid `K_n = 2πn/β`, n ∈ ℤ.
//!
//! [`matsubara_sum`] accumulates symmetric partial sums in blocks of doubling
//! size. After each block the tail `Σ_{|n|>N}` is estimated by fitting `c/n^p`
//! to the last decade of terms. Blocks are evaluated in parallel and reduced
//! pairwise in a fixed order, so results are bit-reproducible.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::numerics::quadrature::{Domain, Integrator, Tolerance};
use crate::numerics::sum::{pairwise_sum, NeumaierSum};

/// Hard cap on the Matsubara index reached by the adaptive sum.
pub const DEFAULT_MAX_INDEX: u64 = 10_000_000;
/// Stop once the tail uncertainty falls below this fraction of the sum.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-10;

const FIRST_BLOCK: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPolicy {
    /// Return the bare partial sum; the tail estimate only feeds the error bar.
    None,
    /// Add the fitted power-law tail to the partial sum.
    PowerTail,
}

/// Inverse temperature plus truncation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    /// β = 1/k_BT, in inverse energy units (ħc/length ⇒ length when ħc = 1).
    pub beta: f64,
    pub max_index: u64,
    pub tail_policy: TailPolicy,
    pub relative_tolerance: f64,
}

impl ThermalState {
    pub fn new(beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        Ok(Self {
            beta,
            max_index: DEFAULT_MAX_INDEX,
            tail_policy: TailPolicy::PowerTail,
            relative_tolerance: DEFAULT_RELATIVE_TOLERANCE,
        })
    }

    pub fn with_max_index(mut self, max_index: u64) -> Self {
        self.max_index = max_index;
        self
    }

    pub fn with_tail_policy(mut self, policy: TailPolicy) -> Self {
        self.tail_policy = policy;
        self
    }

    pub fn with_relative_tolerance(mut self, tol: f64) -> Self {
        self.relative_tolerance = tol;
        self
    }

    /// Matsubara frequency K_n = 2πn/β.
    pub fn frequency(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    pub value: f64,
    pub truncation_error_estimate: f64,
    /// Number of distinct |n| evaluated, including n = 0.
    pub terms_used: u64,
    /// Fitted tail `Σ_{|n|>N}` (already included in `value` under `PowerTail`).
    pub tail_estimate: f64,
}

/// `(1/2)βħω₀·coth((1/2)βħω₀)`, the closed form of `Σ_K (ħω₀)²/((ħω₀)² + K²)`.
pub fn oscillator_sum_closed(beta: f64, hbar_omega0: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    require_non_negative("hbar_omega0", hbar_omega0)?;
    let y = 0.5 * beta * hbar_omega0;
    Ok(if y < 1e-4 {
        // y·coth y = 1 + y²/3 − y⁴/45 + …
        let y2 = y * y;
        1.0 + y2 / 3.0 * (1.0 - y2 / 15.0)
    } else if y > 20.0 {
        // coth y − 1 = 2e^{−2y}/(1 − e^{−2y}) < 1e−17 here
        y * (1.0 + 2.0 * (-2.0 * y).exp())
    } else {
        y / y.tanh()
    })
}

/// Tail fit `c/n^p` over the last decade of terms `[N/10, N]`.
#[derive(Debug, Clone, Copy)]
struct TailFit {
    estimate: f64,
    uncertainty: f64,
}

fn fit_tail<F: Fn(u64) -> f64>(term: &F, n_max: u64) -> Option<TailFit> {
    let lo = (n_max / 10).max(1);
    // log-spaced sample points over the decade
    let points: Vec<u64> = (0..=8)
        .map(|j| (lo as f64 * (n_max as f64 / lo as f64).powf(j as f64 / 8.0)).round() as u64)
        .collect();
    let values: Vec<f64> = points.iter().map(|&n| term(n)).collect();
    if values.iter().all(|&v| v == 0.0) {
        return Some(TailFit {
            estimate: 0.0,
            uncertainty: 0.0,
        });
    }
    let sign = values[values.len() - 1].signum();
    if values.iter().any(|&v| v == 0.0 || v.signum() != sign) {
        return None;
    }
    let exponent = |i: usize, j: usize| -> f64 {
        (values[i].abs() / values[j].abs()).ln() / (points[j] as f64 / points[i] as f64).ln()
    };
    let last = values.len() - 1;
    let p_decade = exponent(0, last);
    let p_local = exponent(last / 2, last);
    let tail_for = |p: f64| -> f64 {
        if p <= 1.0 {
            return f64::INFINITY;
        }
        let c = values[last].abs() * (points[last] as f64).powf(p);
        let start = n_max as f64 + 0.5;
        // both signs of n contribute
        2.0 * c * start.powf(1.0 - p) / (p - 1.0)
    };
    let a = tail_for(p_decade);
    let b = tail_for(p_local);
    if !(a.is_finite() && b.is_finite()) {
        return None;
    }
    Some(TailFit {
        estimate: sign * b,
        uncertainty: (a - b).abs(),
    })
}

/// Adaptive symmetric Matsubara sum `Σ_{n∈ℤ} f(K_n)` for an even summand.
///
/// The n = 0 term carries full weight. `f` must be `Sync` because blocks of
/// terms are evaluated in parallel.
pub fn matsubara_sum<F>(f: F, state: &ThermalState) -> Result<SumResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    require_positive("beta", state.beta)?;
    let term = |n: u64| f(2.0 * PI * n as f64 / state.beta);
    let zero = term(0);
    if !zero.is_finite() {
        return Err(Error::InvalidInput(format!("summand is not finite at K = 0: {zero}")));
    }
    let mut acc = NeumaierSum::default();
    acc.add(zero);
    let mut evaluated: u64 = 0;
    let mut block_end = FIRST_BLOCK.min(state.max_index);
    let mut last_tail = f64::INFINITY;
    loop {
        let block: Vec<f64> = (evaluated + 1..=block_end)
            .into_par_iter()
            .map(|n| 2.0 * term(n))
            .collect();
        let block_sum = pairwise_sum(&block);
        if !block_sum.is_finite() {
            return Err(Error::InvalidInput("summand produced a non-finite term".into()));
        }
        acc.add(block_sum);
        evaluated = block_end;
        let partial = acc.value();

        let fit = fit_tail(&term, evaluated);
        let (tail, uncertainty) = match fit {
            Some(t) => (t.estimate, t.uncertainty),
            None => (0.0, f64::INFINITY),
        };
        let error = match state.tail_policy {
            TailPolicy::PowerTail => uncertainty,
            TailPolicy::None => tail.abs() + uncertainty,
        };
        let value = match state.tail_policy {
            TailPolicy::PowerTail => partial + tail,
            TailPolicy::None => partial,
        };
        let target = state.relative_tolerance * value.abs();
        if error <= target || (error == 0.0 && value == 0.0) {
            return Ok(SumResult {
                value,
                truncation_error_estimate: error,
                terms_used: evaluated + 1,
                tail_estimate: tail,
            });
        }
        if evaluated >= state.max_index {
            return Err(Error::NonConvergence {
                terms: evaluated + 1,
                partial,
                tail_estimate: if tail.is_finite() && uncertainty.is_finite() {
                    tail.abs() + uncertainty
                } else {
                    last_tail
                },
            });
        }
        if tail.is_finite() {
            last_tail = tail.abs() + uncertainty;
        }
        block_end = (evaluated * 2).min(state.max_index);
    }
}

/// Zero-temperature limit of `(1/β)Σ_K g(|K|)`: `(ħc/π)∫₀^∞ g(κ) dκ`.
pub fn zero_t_integral<G>(g: G, tol: Tolerance) -> Result<crate::numerics::QuadratureResult>
where
    G: Fn(f64) -> f64,
{
    zero_t_integral_scaled(g, 1.0, tol)
}

/// As [`zero_t_integral`], with a length scale hint `1/κ_typ` for the map onto (0, 1).
pub fn zero_t_integral_scaled<G>(
    g: G,
    kappa_scale: f64,
    tol: Tolerance,
) -> Result<crate::numerics::QuadratureResult>
where
    G: Fn(f64) -> f64,
{
    let mut r = Integrator::new(tol)
        .breakpoints([kappa_scale, 4.0 * kappa_scale, 16.0 * kappa_scale])
        .integrate(Domain::semi_infinite_scaled(0.0, kappa_scale), g)?;
    r.value /= PI;
    r.error_estimate /= PI;
    Ok(r)
}
