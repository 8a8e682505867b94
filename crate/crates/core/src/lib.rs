//! Adaptive multiresolution discontinuous Galerkin solver for scalar hyperbolic
//! conservation laws `u_t + Σ_m ∂_m f_m(u) = 0` on the periodic unit cube.
//!
//! The solution lives in an orthonormal Alpert multiwavelet space on an adaptive,
//! downward-closed set of hierarchical elements. Nonlinear fluxes are represented
//! with interpolatory multiwavelets and all basis changes are carried out by
//! dimension-by-dimension sparse transforms.

pub mod basis;
pub mod driver;
pub mod grid;
pub mod error;
pub mod exact;
pub mod flux;
pub mod poly;
pub mod projection;
pub mod quadrature;
pub mod residual;
pub mod sample;
pub mod time;
pub mod transform;
pub mod viscosity;

pub use error::{Error, Result};
