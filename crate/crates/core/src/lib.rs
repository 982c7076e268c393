//! Pseudospectral solver and numerical-analysis toolkit for the fractional
//! Euler alignment system
//!
//! ```text
//! σ_t + div(σ u) = -div u
//! u_t + μ (-Δ)^{α/2} u = I_α(u, σ) - μ σ (-Δ)^{α/2} u - (u·∇) u
//! ```
//!
//! posed on a periodic box, together with the Cucker-Smale particle system it
//! descends from and a set of diagnostics that check the Besov-space
//! estimates, the energy balance and the flocking behaviour numerically.

pub mod diagnostics;
pub mod error;
pub mod euler;
pub mod linear;
pub mod littlewood_paley;
pub mod nonlocal;
pub mod particles;
mod quad;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
