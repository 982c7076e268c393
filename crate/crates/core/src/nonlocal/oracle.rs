//! Direct real-space quadrature of the principal-value integrals.
//!
//! The integrand is periodic in the offset `y`, so the integral over the whole
//! space folds onto one cell with the periodized kernel
//! `Σ_m |y + mL|^{-d-α}`. Offsets pair up as `±y`, which cancels the odd part of
//! the integrand; the ball `|y| < δ` is handled by its second-order Taylor term.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::AlignmentParams;
use crate::error::{Error, Result};
use crate::quad;
use crate::spectral::{gradient, neg_laplacian, Grid, ScalarField, VectorField};

const ORDER: usize = 8;
const ANGLE_ORDER: usize = 16;
const MAX_POINTS_PER_AXIS: usize = 128;
const CHUNK: usize = 64;

struct Kernel {
    alpha: f64,
    d: usize,
    length: f64,
    images: i64,
    tail_2d: f64,
}

impl Kernel {
    fn new(grid: &Grid, params: &AlignmentParams) -> Self {
        let length = grid.length();
        let default = if grid.dim() == 1 { 20.0 } else { 8.0 };
        let radius = params.tail_radius.unwrap_or(default * length);
        let images = (radius / length).round().max(1.0) as i64;
        let alpha = params.alpha;
        let tail_2d = if grid.dim() == 2 {
            let a = (images as f64 + 0.5) * length;
            let angular = 8.0 * quad::integrate(|t| t.cos().powf(alpha), 0.0, 0.25 * PI, 8, 16);
            angular * a.powf(-alpha) / (alpha * length * length)
        } else {
            0.0
        };
        Kernel {
            alpha,
            d: grid.dim(),
            length,
            images,
            tail_2d,
        }
    }

    fn eval(&self, y: [f64; 2]) -> f64 {
        let l = self.length;
        let m = self.images;
        let e = -(self.d as f64 + self.alpha);
        if self.d == 1 {
            let mut sum = 0.0;
            for j in (1..=m).rev() {
                let s = j as f64 * l;
                sum += (s + y[0]).abs().powf(e) + (s - y[0]).abs().powf(e);
            }
            let a = (m as f64 + 0.5) * l;
            sum += ((a + y[0]).powf(-self.alpha) + (a - y[0]).powf(-self.alpha)) / (self.alpha * l);
            sum + y[0].abs().powf(e)
        } else {
            let mut sum = 0.0;
            for i in (-m..=m).rev() {
                for j in (-m..=m).rev() {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let a = y[0] + i as f64 * l;
                    let b = y[1] + j as f64 * l;
                    sum += (a * a + b * b).powf(0.5 * e);
                }
            }
            sum + self.tail_2d + (y[0] * y[0] + y[1] * y[1]).powf(0.5 * e)
        }
    }
}

/// Offsets `y` in a half cell with weights; `-y` is the implied partner.
fn nodes(grid: &Grid, delta: f64) -> Vec<([f64; 2], f64)> {
    let h = grid.spacing();
    let half = 0.5 * grid.length();
    let radial = |outer: f64| -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let mut lo = delta;
        while lo < h.min(outer) {
            let hi = (2.0 * lo).min(h).min(outer);
            pts.extend(quad::composite(lo, hi, 1, ORDER));
            lo = hi;
        }
        if outer > lo {
            let pieces = ((outer - lo) / h).ceil().max(1.0) as usize;
            pts.extend(quad::composite(lo, outer, pieces, ORDER));
        }
        pts
    };
    if grid.dim() == 1 {
        radial(half).into_iter().map(|(r, w)| ([r, 0.0], w)).collect()
    } else {
        let mut out = Vec::new();
        for sector in 0..4 {
            let a = sector as f64 * 0.25 * PI;
            for (th, wt) in quad::composite(a, a + 0.25 * PI, 1, ANGLE_ORDER) {
                let (s, c) = th.sin_cos();
                let outer = half / c.abs().max(s.abs());
                for (r, wr) in radial(outer) {
                    out.push(([r * c, r * s], wt * wr * r));
                }
            }
        }
        out
    }
}

fn shifted(grid: &Grid, spec: &[Complex64], y: [f64; 2]) -> Vec<f64> {
    let phased: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let k = grid.wavevector(idx);
            c * Complex64::from_polar(1.0, k[0] * y[0] + k[1] * y[1])
        })
        .collect();
    grid.inverse(&phased)
}

/// `Σ_nodes w K(y) [F(x, y) + F(x, -y)]` for every grid point, `n_out` outputs each.
///
/// `pair(base, plus, minus, x)` returns the integrand pair sum at grid index `x`
/// for output `c` through the callback slot.
fn pv_sum<F>(
    fields: &[&ScalarField],
    params: &AlignmentParams,
    n_out: usize,
    pair: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[&[f64]], &[Vec<f64>], &[Vec<f64>], usize, &mut [f64]) + Sync,
{
    let grid = fields[0].grid().clone();
    if grid.n() > MAX_POINTS_PER_AXIS && !params.allow_large_oracle {
        return Err(Error::Unsupported(format!(
            "oracle quadrature refused on {}^{} points (limit {}^{})",
            grid.n(),
            grid.dim(),
            MAX_POINTS_PER_AXIS,
            grid.dim()
        )));
    }
    let delta = pv_cutoff(&grid, params)?;
    let kernel = Kernel::new(&grid, params);
    let specs: Vec<&[Complex64]> = fields.iter().map(|f| f.spectral()).collect();
    let base: Vec<&[f64]> = fields.iter().map(|f| f.values()).collect();
    let pts = nodes(&grid, delta);
    let npts = grid.len();
    let partial: Vec<Vec<f64>> = pts
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; npts * n_out];
            let mut slot = vec![0.0; n_out];
            for &(y, w) in chunk {
                let kw = w * kernel.eval(y);
                let plus: Vec<Vec<f64>> = specs.iter().map(|s| shifted(&grid, s, y)).collect();
                let minus: Vec<Vec<f64>> =
                    specs.iter().map(|s| shifted(&grid, s, [-y[0], -y[1]])).collect();
                for x in 0..npts {
                    pair(&base, &plus, &minus, x, &mut slot);
                    for c in 0..n_out {
                        acc[x * n_out + c] += kw * slot[c];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; npts * n_out];
    for chunk in partial {
        for (t, v) in total.iter_mut().zip(chunk) {
            *t += v;
        }
    }
    Ok(total)
}

fn pv_cutoff(grid: &Grid, params: &AlignmentParams) -> Result<f64> {
    let delta = params.pv_cutoff.unwrap_or(grid.spacing() / 1024.0);
    if !(delta > 0.0 && delta < grid.spacing()) {
        return Err(Error::config(format!(
            "pv_cutoff must lie in (0, h), got {delta}"
        )));
    }
    Ok(delta)
}

/// `∫_{|y|<δ} (yᵀQy) |y|^{-d-α} dy` per unit trace of `Q`.
fn ball_factor(d: usize, alpha: f64, delta: f64) -> f64 {
    let sphere_over_d = if d == 1 { 2.0 } else { PI };
    sphere_over_d * delta.powf(2.0 - alpha) / (2.0 - alpha)
}

/// Slow evaluation of `pv ∫ (u(x+y) - u(x)) (σ(x+y) - σ(x)) / |y|^{d+α} dy`.
pub fn i_alpha_oracle(u: &VectorField, sigma: &ScalarField, params: &AlignmentParams) -> Result<VectorField> {
    u.check_grid(sigma)?;
    let grid = sigma.grid().clone();
    let delta = pv_cutoff(&grid, params)?;
    let ball = ball_factor(grid.dim(), params.alpha, delta);
    let grad_s = gradient(sigma);
    let comps = u
        .components()
        .iter()
        .map(|ui| {
            let sums = pv_sum(&[ui, sigma], params, 1, |b, p, m, x, out| {
                let (u0, s0) = (b[0][x], b[1][x]);
                out[0] = (p[0][x] - u0) * (p[1][x] - s0) + (m[0][x] - u0) * (m[1][x] - s0);
            })?;
            let grad_u = gradient(ui);
            let values = (0..grid.len())
                .map(|x| {
                    let tr: f64 = (0..grid.dim())
                        .map(|a| grad_u.component(a).values()[x] * grad_s.component(a).values()[x])
                        .sum();
                    sums[x] + ball * tr
                })
                .collect();
            Ok(ScalarField::from_values(&grid, values))
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// Slow evaluation of `pv ∫ (u(x+y) - u(x)) ρ(x+y) / |y|^{d+α} dy`.
pub fn alignment_force_oracle(
    rho: &ScalarField,
    u: &VectorField,
    params: &AlignmentParams,
) -> Result<VectorField> {
    u.check_grid(rho)?;
    let grid = rho.grid().clone();
    let delta = pv_cutoff(&grid, params)?;
    let ball = ball_factor(grid.dim(), params.alpha, delta);
    let grad_r = gradient(rho);
    let comps = u
        .components()
        .iter()
        .map(|ui| {
            let sums = pv_sum(&[ui, rho], params, 1, |b, p, m, x, out| {
                let u0 = b[0][x];
                out[0] = (p[0][x] - u0) * p[1][x] + (m[0][x] - u0) * m[1][x];
            })?;
            let grad_u = gradient(ui);
            let lap_u = neg_laplacian(ui);
            let values = (0..grid.len())
                .map(|x| {
                    let cross: f64 = (0..grid.dim())
                        .map(|a| grad_u.component(a).values()[x] * grad_r.component(a).values()[x])
                        .sum();
                    let tr = cross - 0.5 * lap_u.values()[x] * rho.values()[x];
                    sums[x] + ball * tr
                })
                .collect();
            Ok(ScalarField::from_values(&grid, values))
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// `∫∫ |u(x) - u(y)|² ρ(x) ρ(y) / |x - y|^{d+α} dx dy` over one period in `x`.
pub fn dissipation_oracle(rho: &ScalarField, u: &VectorField, params: &AlignmentParams) -> Result<f64> {
    u.check_grid(rho)?;
    let grid = rho.grid().clone();
    let delta = pv_cutoff(&grid, params)?;
    let ball = ball_factor(grid.dim(), params.alpha, delta);
    let mut fields: Vec<&ScalarField> = vec![rho];
    fields.extend(u.components());
    let dim = grid.dim();
    let sums = pv_sum(&fields, params, 1, |b, p, m, x, out| {
        let r0 = b[0][x];
        let (mut dp, mut dm) = (0.0, 0.0);
        for c in 1..=dim {
            dp += (p[c][x] - b[c][x]).powi(2);
            dm += (m[c][x] - b[c][x]).powi(2);
        }
        out[0] = r0 * (dp * p[0][x] + dm * m[0][x]);
    })?;
    let grads: Vec<VectorField> = u.components().iter().map(gradient).collect();
    let mut total = 0.0;
    for x in 0..grid.len() {
        let mut g2 = 0.0;
        for g in &grads {
            for a in 0..dim {
                g2 += g.component(a).values()[x].powi(2);
            }
        }
        total += sums[x] + ball * rho.values()[x].powi(2) * g2;
    }
    Ok(total * grid.cell_volume())
}
