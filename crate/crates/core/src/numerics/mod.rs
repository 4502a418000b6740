//! Shared numerical machinery: adaptive quadrature, oscillatory integrals,
//! Richardson extrapolation, small least-squares fits and deterministic sums.

pub mod fit;
pub mod oscillatory;
pub mod quadrature;
pub mod richardson;
pub mod special;
pub mod sum;

pub use fit::{linear_fit, FitResult};
pub use oscillatory::{integrate_oscillatory, OscillatoryIntegrator};
pub use quadrature::{integrate, integrate_box, Domain, Integrator, QuadratureResult, Tolerance};
pub use richardson::{richardson_extrapolate, Extrapolation};
pub use sum::{pairwise_sum, NeumaierSum};
