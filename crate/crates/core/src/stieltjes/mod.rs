//! The fixed-point equation for the Stieltjes transform: root selection,
//! density by inversion, moments at infinity and the ridge trace.

mod density;
mod equation;
pub mod mp;
mod ridge;
mod series;

pub use density::{density, DensityConfig, SpectralDensity};
pub use equation::{
    candidate_roots, companion_transform, equation_residual, h_transform, quartic_coefficients, solve_g,
    StieltjesPoint, RESIDUAL_TOL,
};
pub use ridge::{ridge_trace, RidgeEval};
pub use series::{moments_from_equation, moments_from_equation_f64, moments_generic, SERIES_Q_MAX};
