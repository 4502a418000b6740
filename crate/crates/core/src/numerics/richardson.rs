//! Richardson extrapolation to zero step size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub error_estimate: f64,
    /// False when successive differences fail to shrink as `h` decreases.
    pub monotone: bool,
}

/// Extrapolate `value(h)` to `h → 0` assuming
/// `value(h) = L + c₀·h^p + c₁·h^{p+1} + …` with `p = order_hypothesis`.
///
/// With `n` samples the model keeps `n − 1` correction terms and is solved
/// exactly. The error estimate is the shift between that limit and the limit
/// obtained from the `n − 1` smallest-`h` samples.
pub fn richardson_extrapolate(samples: &[(f64, f64)], order_hypothesis: f64) -> Result<Extrapolation> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "richardson extrapolation needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if !(order_hypothesis.is_finite() && order_hypothesis > 0.0) {
        return Err(Error::InvalidInput("order hypothesis must be positive".into()));
    }
    let mut sorted = samples.to_vec();
    for &(h, v) in &sorted {
        if !(h.is_finite() && h > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("bad sample (h={h}, value={v})")));
        }
    }
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidInput("step sizes must be distinct".into()));
    }

    let limit = solve_limit(&sorted, order_hypothesis)?;
    let reduced = solve_limit(&sorted[1..], order_hypothesis)?;
    let diffs: Vec<f64> = sorted.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let monotone = diffs.windows(2).all(|d| d[1] <= d[0]);
    Ok(Extrapolation {
        limit,
        error_estimate: (limit - reduced).abs(),
        monotone,
    })
}

fn solve_limit(samples: &[(f64, f64)], p: f64) -> Result<f64> {
    let n = samples.len();
    // scale h by the largest step so the powers stay O(1)
    let h0 = samples[0].0;
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    for (i, &(h, v)) in samples.iter().enumerate() {
        let s = h / h0;
        a[(i, 0)] = 1.0;
        for j in 1..n {
            a[(i, j)] = s.powf(p + (j - 1) as f64);
        }
        b[i] = v;
    }
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    Ok(x[0])
}
