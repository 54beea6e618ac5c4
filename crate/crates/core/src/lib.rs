//! Exact Malliavin calculus on polynomial functionals of finitely many
//! independent standard Gaussians.
//!
//! The symbolic core is generic over the scalar type through [`Real`]
//! (implemented for `f32` and `f64`); the aliases below fix it to `f64`,
//! which is what the Monte Carlo, density and Gaussian-measure modules use.

pub mod brownian;
pub mod chaos;
pub mod density;
pub mod error;
pub mod gaussian_core;
pub mod gaussian_measure;
pub mod hermite;
pub mod mc;
pub mod operators;
pub mod poly;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use poly::MultiIndex;
pub use scalar::Real;

pub type Poly = poly::PolyFunctional<f64>;
pub type Chaos = chaos::ChaosExpansion<f64>;
pub type HVec = gaussian_core::HVector<f64>;
pub type Cov = gaussian_core::CovMatrix<f64>;
