//! Semi-infinite integrals of slowly decaying oscillatory integrands.
//!
//! The half-line is cut into panels of one half-period, each panel is
//! integrated adaptively, and the sequence of partial sums is accelerated
//! with Wynn's epsilon algorithm.

use super::quadrature::{Domain, Integrator, QuadratureResult, Tolerance};
use crate::error::{Error, Result};

/// Panel-sum integrator for `∫_start^∞ f(x) dx` with known half-period.
#[derive(Debug, Clone)]
pub struct OscillatoryIntegrator {
    pub tolerance: Tolerance,
    pub max_panels: usize,
    pub min_panels: usize,
    /// Number of trailing partial sums fed to the epsilon table.
    pub window: usize,
}

impl OscillatoryIntegrator {
    pub fn new(tolerance: Tolerance) -> Self {
        Self {
            tolerance,
            max_panels: 20_000,
            min_panels: 8,
            window: 40,
        }
    }

    pub fn integrate<F>(&self, start: f64, half_period: f64, f: F) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> f64,
    {
        if !(half_period.is_finite() && half_period > 0.0) || !start.is_finite() {
            return Err(Error::InvalidInput(format!(
                "oscillatory quadrature needs a finite start and positive half-period, got start={start}, half_period={half_period}"
            )));
        }
        let panel_tol = Tolerance::new(self.tolerance.abs * 1e-3, 1e-13);
        let integrator = Integrator::new(panel_tol).max_cells(400);
        let mut partial = Vec::with_capacity(256);
        let mut running = 0.0;
        let mut compensation = 0.0;
        let mut panel_error = 0.0;
        let mut cells = 0;
        let mut last_estimate = f64::NAN;
        let mut previous_estimate = f64::NAN;
        for j in 0..self.max_panels {
            let lo = start + j as f64 * half_period;
            let hi = lo + half_period;
            let panel = match integrator.integrate(Domain::finite(lo, hi), &f) {
                Ok(r) => r,
                Err(Error::QuadratureBudget {
                    partial,
                    error_estimate,
                    cells,
                }) => QuadratureResult {
                    value: partial,
                    error_estimate,
                    cells_evaluated: cells,
                },
                Err(e) => return Err(e),
            };
            cells += panel.cells_evaluated;
            panel_error += panel.error_estimate;
            // Kahan-style running sum for the partial-sum sequence
            let y = panel.value - compensation;
            let t = running + y;
            compensation = (t - running) - y;
            running = t;
            partial.push(running);

            if partial.len() < 3 {
                continue;
            }
            let window_start = partial.len().saturating_sub(self.window);
            let estimate = wynn_epsilon(&partial[window_start..]);
            let accel_err = if previous_estimate.is_finite() {
                (estimate - last_estimate)
                    .abs()
                    .max((estimate - previous_estimate).abs())
            } else {
                f64::INFINITY
            };
            previous_estimate = last_estimate;
            last_estimate = estimate;

            // direct convergence for damped integrands: the last two panels bound the tail
            let direct_err = panel.value.abs() + (partial[partial.len() - 2] - partial[partial.len() - 3]).abs();
            let (value, err) = if direct_err <= accel_err {
                (running, direct_err)
            } else {
                (estimate, accel_err)
            };
            let target = self.tolerance.target(value);
            let converged = err <= target;
            let err = err + panel_error;
            // once the tail adds nothing at working precision, further panels only
            // grow the accumulated roundoff; stop and report it honestly
            let exhausted = converged && panel.value.abs() <= f64::EPSILON * running.abs();
            if j + 1 >= self.min_panels && (err <= target || exhausted) {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: err,
                    cells_evaluated: cells,
                });
            }
        }
        let value = if last_estimate.is_finite() { last_estimate } else { running };
        Err(Error::QuadratureBudget {
            partial: value,
            error_estimate: (value - previous_estimate).abs(),
            cells,
        })
    }
}

/// Wynn epsilon extrapolation of a sequence of partial sums; returns the
/// highest-order even-column entry on the last anti-diagonal.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n == 0 {
        return f64::NAN;
    }
    // prev = column j-1, cur = column j
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    let mut best = seq[n - 1];
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let diff = cur[k + 1] - cur[k];
            if diff == 0.0 {
                // the sequence has converged at this order
                return if column % 2 == 0 { cur[k + 1] } else { best };
            }
            next.push(prev[k + 1] + 1.0 / diff);
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            let candidate = cur[cur.len() - 1];
            if candidate.is_finite() {
                best = candidate;
            } else {
                break;
            }
        }
    }
    best
}

/// `∫_start^∞ f` with the default panel integrator.
pub fn integrate_oscillatory<F>(
    f: F,
    start: f64,
    half_period: f64,
    tol: Tolerance,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    OscillatoryIntegrator::new(tol).integrate(start, half_period, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn epsilon_sums_alternating_harmonic_series() {
        let mut s = 0.0;
        let partial: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert_relative_eq!(wynn_epsilon(&partial), 2f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn dirichlet_integral() {
        let r = integrate_oscillatory(
            |x| if x == 0.0 { 1.0 } else { x.sin() / x },
            0.0,
            PI,
            Tolerance::absolute(1e-11),
        )
        .unwrap();
        assert_relative_eq!(r.value, PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn damped_integrand_converges_directly() {
        // ∫₀^∞ e^{-x/5} cos x dx = (1/5)/(1/25 + 1)
        let r = integrate_oscillatory(
            |x| (-0.2 * x).exp() * x.cos(),
            0.0,
            PI,
            Tolerance::relative(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, 0.2 / 1.04, max_relative = 1e-11);
    }
}
