//! Retarded van der Waals pair energies between polarizable particles and the
//! regularized Casimir energy of a dilute dielectric sphere.
//!
//! Natural units ħ = c = 1 are used internally: lengths share one arbitrary
//! unit and energies come out in units of ħc/length.

// rule nodes are quoted to full published precision; `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod matsubara;
pub mod numerics;
pub mod pair_energy;
pub mod sphere_energy;

pub use error::{Error, Result};
