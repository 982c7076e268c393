//! The N-particle Cucker-Smale system with the singular weight
//! `ψ(s) = s^{-(d+α)}`, on the periodic box, plus Gaussian deposition of the
//! empirical density and velocity onto a grid.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::stream_rng;
use crate::spectral::{Grid, ScalarField, VectorField};

/// `s^{-(d+α)}`, capped at `delta_reg^{-(d+α)}` below `delta_reg`.
pub fn singular_weight(s: f64, d: usize, alpha: f64, delta_reg: f64) -> f64 {
    s.max(delta_reg).powf(-(d as f64 + alpha))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParticleParams {
    pub d: usize,
    pub alpha: f64,
    pub length: f64,
    pub delta_reg: f64,
}

impl ParticleParams {
    pub fn new(d: usize, alpha: f64, length: f64, delta_reg: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::config(format!("dimension must be 1 or 2, got {d}")));
        }
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::config(format!(
                "alpha must lie in the open range (1, 2), got {alpha}"
            )));
        }
        if !(length > 0.0) || !(delta_reg > 0.0) {
            return Err(Error::config("box length and delta_reg must be positive"));
        }
        Ok(ParticleParams { d, alpha, length, delta_reg })
    }

    fn weight(&self, s: f64) -> f64 {
        singular_weight(s, self.d, self.alpha, self.delta_reg)
    }

    /// Minimal-image separation `x_i - x_j`.
    fn separation(&self, xi: &[f64], xj: &[f64]) -> f64 {
        let l = self.length;
        xi.iter()
            .zip(xj)
            .map(|(a, b)| {
                let dx = a - b;
                let dx = dx - l * (dx / l).round();
                dx * dx
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Positions and velocities stored row-major, `d` entries per particle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    pub d: usize,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn new(d: usize, positions: Vec<f64>, velocities: Vec<f64>, length: f64) -> Result<Self> {
        if d == 0 || positions.len() != velocities.len() || positions.len() % d != 0 {
            return Err(Error::config("positions and velocities must both be N×d"));
        }
        if positions.len() / d < 2 {
            return Err(Error::config("an ensemble needs at least two particles"));
        }
        if positions.iter().chain(&velocities).any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite particle data"));
        }
        let mut e = ParticleEnsemble { d, positions, velocities };
        e.wrap(length);
        Ok(e)
    }

    /// Uniform positions and velocities uniform in `[-v_scale, v_scale]^d`.
    pub fn random(n: usize, params: &ParticleParams, v_scale: f64, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, 0);
        let d = params.d;
        let positions = (0..n * d).map(|_| rng.random_range(0.0..params.length)).collect();
        let velocities = (0..n * d).map(|_| rng.random_range(-v_scale..=v_scale)).collect();
        Self::new(d, positions, velocities, params.length)
    }

    pub fn n_particles(&self) -> usize {
        self.positions.len() / self.d
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.d..(i + 1) * self.d]
    }

    fn wrap(&mut self, length: f64) {
        for x in &mut self.positions {
            *x = x.rem_euclid(length);
            // rem_euclid can round up to exactly `length`
            if *x >= length {
                *x = 0.0;
            }
        }
    }

    /// `Σ_i v_i`.
    pub fn momentum(&self) -> Vec<f64> {
        (0..self.d)
            .map(|c| (0..self.n_particles()).map(|i| self.velocities[i * self.d + c]).sum())
            .collect()
    }

    pub fn mean_velocity(&self) -> Vec<f64> {
        let n = self.n_particles() as f64;
        self.momentum().into_iter().map(|m| m / n).collect()
    }

    /// `max_{i,j} |v_i - v_j|`.
    pub fn velocity_diameter(&self) -> f64 {
        let n = self.n_particles();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| {
                        self.velocity(i)
                            .iter()
                            .zip(self.velocity(j))
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
            .sqrt()
    }

    /// `(1/2N) Σ |v_i - v̄|²`.
    pub fn fluctuation_energy(&self) -> f64 {
        let vbar = self.mean_velocity();
        let n = self.n_particles();
        let s: f64 = (0..n)
            .map(|i| self.velocity(i).iter().zip(&vbar).map(|(v, m)| (v - m).powi(2)).sum::<f64>())
            .sum();
        s / (2.0 * n as f64)
    }
}

/// Alignment acceleration `(1/N) Σ_j (v_j - v_i) ψ(|x_i - x_j|)`; each particle
/// sums over partners in index order so the result is thread-count independent.
fn accelerations(x: &[f64], v: &[f64], d: usize, params: &ParticleParams) -> Vec<f64> {
    let n = x.len() / d;
    let inv_n = 1.0 / n as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &x[i * d..(i + 1) * d];
            let vi = &v[i * d..(i + 1) * d];
            let mut acc = vec![0.0; d];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let w = params.weight(params.separation(xi, &x[j * d..(j + 1) * d]));
                for c in 0..d {
                    acc[c] += (v[j * d + c] - vi[c]) * w;
                }
            }
            acc.iter_mut().for_each(|a| *a *= inv_n);
            acc
        })
        .collect();
    rows.concat()
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// One classical RK4 step; positions are wrapped afterwards.
pub fn cs_step(e: &ParticleEnsemble, dt: f64, params: &ParticleParams) -> Result<ParticleEnsemble> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be positive, got {dt}")));
    }
    let d = e.d;
    let (x, v) = (&e.positions, &e.velocities);
    let k1x = v.clone();
    let k1v = accelerations(x, v, d, params);
    let (x2, v2) = (axpy(x, 0.5 * dt, &k1x), axpy(v, 0.5 * dt, &k1v));
    let k2v = accelerations(&x2, &v2, d, params);
    let (x3, v3) = (axpy(x, 0.5 * dt, &v2), axpy(v, 0.5 * dt, &k2v));
    let k3v = accelerations(&x3, &v3, d, params);
    let (x4, v4) = (axpy(x, dt, &v3), axpy(v, dt, &k3v));
    let k4v = accelerations(&x4, &v4, d, params);
    let combine = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], dd: &[f64]| -> Vec<f64> {
        (0..y.len())
            .map(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + dd[i]))
            .collect()
    };
    let mut out = ParticleEnsemble {
        d,
        positions: combine(x, &k1x, &v2, &v3, &v4),
        velocities: combine(v, &k1v, &k2v, &k3v, &k4v),
    };
    out.wrap(params.length);
    if out.velocities.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("particle velocities became non-finite"));
    }
    Ok(out)
}

/// Periodized 1D Gaussian weights of one coordinate on the grid axis,
/// normalized to sum to one.
fn axis_weights(grid: &Grid, x: f64, width: f64) -> Vec<f64> {
    let h = grid.spacing();
    let l = grid.length();
    let mut w: Vec<f64> = (0..grid.n())
        .map(|i| {
            let dx = i as f64 * h - x;
            let dx = dx - l * (dx / l).round();
            (-0.5 * (dx / width).powi(2)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Gaussian deposition with per-particle mass `L^d / N`, so that the density has
/// mean one like the continuum `ρ = 1 + σ`. The velocity is momentum over
/// density where the density exceeds `rho_floor` and zero elsewhere.
pub fn deposit_fields(
    e: &ParticleEnsemble,
    grid: &Arc<Grid>,
    kernel_width: f64,
    rho_floor: f64,
) -> Result<(ScalarField, VectorField)> {
    if grid.dim() != e.d {
        return Err(Error::config("ensemble and grid dimensions differ"));
    }
    if !(kernel_width >= grid.spacing()) {
        return Err(Error::config(format!(
            "kernel width {kernel_width} is below the grid spacing {}",
            grid.spacing()
        )));
    }
    let d = e.d;
    let n = grid.n();
    let mass = grid.length().powi(d as i32) / e.n_particles() as f64;
    let scale = mass / grid.cell_volume();
    let mut rho = vec![0.0; grid.len()];
    let mut mom = vec![vec![0.0; grid.len()]; d];
    for p in 0..e.n_particles() {
        let x = e.position(p);
        let v = e.velocity(p);
        let wx = axis_weights(grid, x[0], kernel_width);
        let wy = if d == 2 { axis_weights(grid, x[1], kernel_width) } else { vec![1.0] };
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wy.iter().enumerate() {
                let idx = if d == 2 { i * n + j } else { i };
                let k = scale * a * b;
                rho[idx] += k;
                for c in 0..d {
                    mom[c][idx] += k * v[c];
                }
            }
        }
    }
    let comps = mom
        .into_iter()
        .map(|m| {
            let vals = m
                .iter()
                .zip(&rho)
                .map(|(m, r)| if *r > rho_floor { m / r } else { 0.0 })
                .collect();
            ScalarField::from_values(grid, vals)
        })
        .collect();
    Ok((ScalarField::from_values(grid, rho), VectorField::new(comps)?))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParticleRecord {
    pub t: f64,
    pub diameter: f64,
    pub fluctuation: f64,
    pub momentum_x: f64,
    pub momentum_y: f64,
}

impl ParticleRecord {
    pub fn of(t: f64, e: &ParticleEnsemble) -> Self {
        let m = e.momentum();
        ParticleRecord {
            t,
            diameter: e.velocity_diameter(),
            fluctuation: e.fluctuation_energy(),
            momentum_x: m[0],
            momentum_y: m.get(1).copied().unwrap_or(0.0),
        }
    }
}

pub const PARTICLE_CSV_COLUMNS: [&str; 5] = ["t", "diameter", "fluctuation", "momentum_x", "momentum_y"];

pub fn write_particle_csv<W: std::io::Write>(mut out: W, records: &[ParticleRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", PARTICLE_CSV_COLUMNS.join(","))?;
    for r in records {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            r.t, r.diameter, r.fluctuation, r.momentum_x, r.momentum_y
        )?;
    }
    Ok(())
}

/// Runs `steps` RK4 steps, recording every `record_every` steps and at the end.
pub fn run_particles(
    e0: &ParticleEnsemble,
    dt: f64,
    steps: usize,
    record_every: usize,
    params: &ParticleParams,
) -> Result<(ParticleEnsemble, Vec<ParticleRecord>)> {
    let every = record_every.max(1);
    let mut e = e0.clone();
    let mut records = vec![ParticleRecord::of(0.0, &e)];
    for n in 1..=steps {
        e = cs_step(&e, dt, params)?;
        if n % every == 0 || n == steps {
            records.push(ParticleRecord::of(n as f64 * dt, &e));
        }
    }
    Ok((e, records))
}

/// `[particles]` run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleRunConfig {
    #[serde(default = "default_dim")]
    pub d: usize,
    pub alpha: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    pub n_particles: usize,
    pub seed: u64,
    #[serde(default = "default_v_scale")]
    pub v_scale: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_every")]
    pub record_every: usize,
    /// Defaults to half the spacing of the deposition grid, or of a 64-point
    /// grid when nothing is deposited.
    #[serde(default)]
    pub delta_reg: Option<f64>,
    #[serde(default)]
    pub deposit: Option<DepositConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepositConfig {
    pub n: usize,
    /// Defaults to two grid spacings.
    #[serde(default)]
    pub kernel_width: Option<f64>,
    #[serde(default = "default_floor")]
    pub rho_floor: f64,
}

fn default_dim() -> usize {
    1
}

fn default_length() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_v_scale() -> f64 {
    1.0
}

fn default_every() -> usize {
    1
}

fn default_floor() -> f64 {
    1e-8
}

impl ParticleRunConfig {
    pub fn params(&self) -> Result<ParticleParams> {
        let n = self.deposit.as_ref().map_or(64, |dep| dep.n);
        let delta = self.delta_reg.unwrap_or(0.5 * self.length / n as f64);
        let p = ParticleParams::new(self.d, self.alpha, self.length, delta)?;
        if self.n_particles < 2 {
            return Err(Error::config("n_particles must be at least 2"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(p)
    }
}
