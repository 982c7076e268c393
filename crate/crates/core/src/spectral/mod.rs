//! Periodic-grid fields, FFT services and Fourier-multiplier operators.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{lp_norm, ScalarField, VectorField};
pub use grid::{make_grid, Grid};
pub use ops::{
    advect, advect_scalar, apply_multiplier, apply_radial, dealias, dealias_spectrum, divergence,
    fractional_laplacian, gradient, is_resolved, neg_laplacian, partial, product, riesz_power,
    scalar_times_vector,
};
pub(crate) use ops::{fractional_laplacian_unchecked, homogeneous_symbol};
