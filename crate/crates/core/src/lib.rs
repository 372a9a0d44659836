//! Numerical laboratory for the three-dimensional incompressible Navier–Stokes
//! system with per-axis viscosities
//!
//! ```text
//! ∂_t u − (ν₁∂₁² + ν₂∂₂² + ν₃∂₃²) u + u·∇u + ∇P = 0,   div u = 0,
//! ```
//!
//! posed on a periodic box. The crate provides the dyadic (Littlewood–Paley)
//! machinery, the anisotropic norms, closed-form lifespan lower bounds, a
//! pseudo-spectral solver with lifespan proxies, a Picard solver for the
//! integral form, a numerical inequality checker and a sweep harness tying
//! them together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fft;
pub mod field;
pub mod lp;
pub mod norms;
pub mod dynamics;
pub mod bounds;
pub mod initial;
pub mod mild;
pub mod inequality;
pub mod experiments;

pub use error::{Error, Result};
pub use field::{Grid3, RealField3, SpectralField3, VectorField3};
pub use dynamics::ViscosityTriple;
