//! Spherical Bessel functions of the first kind, orders 0 to 2.
//!
//! The closed forms lose digits to cancellation for small arguments, so each
//! order switches to its Taylor series below a fixed threshold.

/// j₀(x) = sin x / x
pub fn spherical_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// j₁(x) = sin x / x² − cos x / x
pub fn spherical_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.1 {
        let x2 = x * x;
        // x/3 · Σ (−x²/2)^k / (k! · (2k+3)!!/3)
        x / 3.0
            * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0 * (1.0 - x2 / 88.0))))
    } else {
        let (s, c) = x.sin_cos();
        (s / x - c) / x
    }
}

/// j₂(x) = (3/x³ − 1/x) sin x − 3 cos x / x²
pub fn spherical_j2(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.5 {
        let x2 = x * x;
        x2 / 15.0
            * (1.0
                - x2 / 14.0
                    * (1.0 - x2 / 36.0 * (1.0 - x2 / 66.0 * (1.0 - x2 / 104.0 * (1.0 - x2 / 150.0)))))
    } else {
        let (s, c) = x.sin_cos();
        ((3.0 / (x * x) - 1.0) * s - 3.0 * c / x) / x
    }
}
