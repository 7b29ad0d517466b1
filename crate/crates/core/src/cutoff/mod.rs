//! Smooth cutoffs of eigenfunctions, periodized onto the torus, with the
//! annulus split of their Fourier coefficients and derivative bounds.

pub mod profile;
pub mod torus;

pub use profile::{bump, derivative_table, Profile};
pub use torus::{
    coefficient_bound_report, default_alpha, derivative_sup_bound, periodize, CoefficientReport, Cutoff,
    DerivativeBound, TorusField,
};
