//! Limiting eigenvalue distributions of `M = (1/m) f(WX/sqrt(n0)) f(WX/sqrt(n0))^T`
//! computed three ways: exact enumeration of cactus graphs, the quartic
//! fixed-point equation for the Stieltjes transform, and Monte Carlo
//! simulation of finite matrices.

pub mod acceptance;
pub mod activation;
pub mod cactus;
pub mod cli;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod params;
pub mod poly;
pub mod quadrature;
pub mod shape;
pub mod stieltjes;

pub use activation::{ActivationConfig, ActivationKind, ActivationSpec, HermiteProjection, ThetaParams};
pub use error::{Error, Result};
pub use params::{RationalParams, SpectralParams};
pub use shape::ModelShape;

/// Field operations shared by the exact (rational) and floating-point paths.
pub trait Scalar:
    Clone + num_traits::Num + num_traits::FromPrimitive + std::ops::Neg<Output = Self>
{
}

impl<T> Scalar for T where T: Clone + num_traits::Num + num_traits::FromPrimitive + std::ops::Neg<Output = T> {}

/// Version string embedded in every file the crate writes.
pub const SCHEMA_VERSION: &str = "spectral-law/1";
