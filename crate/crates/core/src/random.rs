//! Seeded band-limited random fields.
//!
//! Coefficients are drawn per integer mode in a fixed order that does not
//! depend on the grid size, so a given `(seed, stream)` describes the same
//! continuum trigonometric polynomial on every grid that resolves it.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField, VectorField};

/// Generator for stream `stream` of the run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Integer modes with `1 <= max|m_i| <= m_max` in one half of the lattice, in a fixed order.
fn half_lattice(dim: usize, m_max: i64) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    if dim == 1 {
        out.extend((1..=m_max).map(|m| [m, 0]));
    } else {
        for m0 in 0..=m_max {
            for m1 in -m_max..=m_max {
                if m0 == 0 && m1 <= 0 {
                    continue;
                }
                out.push([m0, m1]);
            }
        }
    }
    out
}

/// Random mean-free trigonometric polynomial with modes up to `m_max` per axis and
/// coefficient standard deviation `(1 + |m|)^{-decay}`.
pub fn band_limited_field(
    grid: &Arc<Grid>,
    rng: &mut ChaCha8Rng,
    m_max: usize,
    decay: f64,
) -> Result<ScalarField> {
    if m_max == 0 || m_max > grid.n() / 3 {
        return Err(Error::config(format!(
            "random fields need 1 <= m_max <= N/3 = {}, got {m_max}",
            grid.n() / 3
        )));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for m in half_lattice(grid.dim(), m_max as i64) {
        let norm = ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
        let sd = (1.0 + norm).powf(-decay);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let c = Complex64::new(re, im) * sd;
        let pos = grid.index_of_mode(m).expect("mode resolved by construction");
        let neg = grid.index_of_mode([-m[0], -m[1]]).expect("mode resolved by construction");
        coeffs[pos] = c;
        coeffs[neg] = c.conj();
    }
    Ok(ScalarField::from_spectral(grid, &coeffs))
}

/// One [`band_limited_field`] per component.
pub fn band_limited_vector(
    grid: &Arc<Grid>,
    rng: &mut ChaCha8Rng,
    m_max: usize,
    decay: f64,
) -> Result<VectorField> {
    let comps = (0..grid.dim())
        .map(|_| band_limited_field(grid, rng, m_max, decay))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}
