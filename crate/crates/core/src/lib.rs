//! Cosine, Funk, sine and Stiefel-manifold transforms on the unit sphere,
//! the weighted Beltrami–Laplace operators that invert them, and tools to
//! check the inversion formulas numerically by independent routes.

pub mod cli;
pub mod diff_ops;
pub mod error;
pub mod gamma;
pub mod inversion;
pub mod quadrature;
pub mod spectral;
pub mod sphere;
pub mod stiefel;
pub mod transforms;

pub use error::{Error, Result};
