//! Small weighted linear least-squares fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition number (of the column-scaled, weighted design matrix) above
/// which a fit is refused.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    /// Ratio of extreme singular values of the column-scaled design matrix.
    pub condition_number: f64,
    /// Euclidean norm of the weighted residual vector.
    pub residual_norm: f64,
    /// Largest |residual| relative to |y| over the samples.
    pub max_relative_residual: f64,
}

/// Least-squares solution of `Σ_j c_j·basis[i][j] ≈ y[i]`, with optional
/// per-row weights. Columns are rescaled to unit norm before the SVD so the
/// reported condition number measures genuine collinearity rather than units.
pub fn linear_fit(design: &[Vec<f64>], y: &[f64], weights: Option<&[f64]>) -> Result<FitResult> {
    let rows = design.len();
    if rows != y.len() {
        return Err(Error::InvalidInput(format!(
            "design has {rows} rows but {} observations",
            y.len()
        )));
    }
    let cols = design.first().map_or(0, Vec::len);
    if cols == 0 || design.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("design rows must be non-empty and equal length".into()));
    }
    if rows <= cols {
        return Err(Error::InvalidInput(format!(
            "need more samples ({rows}) than basis functions ({cols})"
        )));
    }
    if let Some(w) = weights {
        if w.len() != rows || w.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::InvalidInput("weights must be positive, one per row".into()));
        }
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);

    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = design[i][j] * w(i);
        }
        b[i] = y[i] * w(i);
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in fit inputs".into()));
    }
    let scales: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    if scales.contains(&0.0) {
        return Err(Error::IllConditioned { condition: f64::INFINITY });
    }
    for (j, &s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let scaled = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidInput(format!("svd solve failed: {e}")))?;
    let coefficients: Vec<f64> = scaled.iter().zip(&scales).map(|(c, s)| c / s).collect();

    let residual = &b - &a * &scaled;
    let mut max_rel: f64 = 0.0;
    for i in 0..rows {
        let fitted: f64 = design[i].iter().zip(&coefficients).map(|(x, c)| x * c).sum();
        let denom = y[i].abs().max(f64::MIN_POSITIVE);
        max_rel = max_rel.max((fitted - y[i]).abs() / denom);
    }
    Ok(FitResult {
        coefficients,
        condition_number: condition,
        residual_norm: residual.norm(),
        max_relative_residual: max_rel,
    })
}
