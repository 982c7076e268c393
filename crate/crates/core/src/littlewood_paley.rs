//! Discrete Littlewood-Paley decomposition and homogeneous Besov norms.
//!
//! The low-frequency profile `chi` equals 1 on `|ξ| <= 3/4`, vanishes for
//! `|ξ| >= 4/3`, and interpolates with the `exp(-1/t)` smooth step in between.
//! The annular profile is `phi(ξ) = chi(ξ/2) - chi(ξ)` and the block `Δ_j`
//! multiplies the coefficient at `k` by `phi(2^{-j} k)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{lp_norm, Grid, ScalarField};

pub const CHI_INNER: f64 = 0.75;
pub const CHI_OUTER: f64 = 4.0 / 3.0;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step rising from 0 at `t <= 0` to 1 at `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        a / (a + bump(1.0 - t))
    }
}

/// Radial low-frequency profile `chi(|ξ|)`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Radial annular profile `phi(|ξ|) = chi(|ξ|/2) - chi(|ξ|)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Smoothness/integrability/summation exponents of a homogeneous Besov norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::config("Besov smoothness must be finite"));
        }
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::config(format!(
                "Besov exponents need p, q >= 1 (got p = {p}, q = {q})"
            )));
        }
        Ok(BesovSpec { s, p, q })
    }

    /// `Ḃ^s_{d,1}`, the family used throughout the solver.
    pub fn critical(s: f64, d: usize) -> Self {
        BesovSpec { s, p: d as f64, q: 1.0 }
    }
}

/// One row of a block-by-block norm evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockNorm {
    pub j: i32,
    pub lp: f64,
    pub weighted: f64,
}

/// Block profiles realized on the frequencies of one grid.
#[derive(Debug)]
pub struct DyadicDecomposition {
    grid: Arc<Grid>,
    j_min: i32,
    j_max: i32,
    /// Sparse `(flat index, phi(2^{-j} k))` lists, one per block.
    blocks: Vec<Vec<(usize, f64)>>,
}

/// Builds the block family for `grid` and checks the partition of unity.
pub fn build_cutoffs(grid: &Arc<Grid>) -> Result<DyadicDecomposition> {
    let knorm = grid.k_norms();
    let k_min = grid.k_min();
    let k_max = grid.k_max();
    // phi(2^{-j} k) != 0 requires 3/4 < 2^{-j} k < 8/3
    let lo = (k_min * 3.0 / 8.0).log2().floor() as i32;
    let hi = (k_max * 4.0 / 3.0).log2().ceil() as i32;

    let mut tables: Vec<(i32, Vec<(usize, f64)>)> = (lo..=hi)
        .map(|j| {
            let scale = (-j as f64).exp2();
            let entries = knorm
                .iter()
                .enumerate()
                .filter_map(|(idx, &k)| {
                    let w = phi(scale * k);
                    (k > 0.0 && w != 0.0).then_some((idx, w))
                })
                .collect();
            (j, entries)
        })
        .collect();
    while tables.first().is_some_and(|t| t.1.is_empty()) {
        tables.remove(0);
    }
    while tables.last().is_some_and(|t| t.1.is_empty()) {
        tables.pop();
    }
    let j_min = tables.first().map(|t| t.0).unwrap_or(0);
    let j_max = tables.last().map(|t| t.0).unwrap_or(-1);

    let decomposition = DyadicDecomposition {
        grid: Arc::clone(grid),
        j_min,
        j_max,
        blocks: tables.into_iter().map(|t| t.1).collect(),
    };
    decomposition.check_partition(1e-12)?;
    Ok(decomposition)
}

impl DyadicDecomposition {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// `phi(2^{-j} k)` on the grid, zero outside the active range.
    pub fn block_weight(&self, j: i32, idx: usize) -> f64 {
        if j < self.j_min || j > self.j_max {
            return 0.0;
        }
        phi((-j as f64).exp2() * self.grid.k_norms()[idx])
    }

    fn block_entries(&self, j: i32) -> &[(usize, f64)] {
        if j < self.j_min || j > self.j_max {
            &[]
        } else {
            &self.blocks[(j - self.j_min) as usize]
        }
    }

    /// Largest deviation of `Σ_j phi(2^{-j} k)` from 1 over nonzero grid frequencies.
    pub fn partition_defect(&self) -> (f64, f64) {
        let mut sums = vec![0.0; self.grid.len()];
        for j in self.j_range() {
            for &(idx, w) in self.block_entries(j) {
                sums[idx] += w;
            }
        }
        let mut worst = (0.0, 0.0);
        for (idx, &k) in self.grid.k_norms().iter().enumerate() {
            if k > 0.0 {
                let defect = (sums[idx] - 1.0).abs();
                if defect > worst.0 {
                    worst = (defect, k);
                }
            }
        }
        worst
    }

    fn check_partition(&self, tol: f64) -> Result<()> {
        let (defect, k_norm) = self.partition_defect();
        if defect > tol {
            let idx = self
                .grid
                .k_norms()
                .iter()
                .position(|&k| k == k_norm)
                .unwrap_or(0);
            let sum = self.j_range().map(|j| self.block_weight(j, idx)).sum();
            return Err(Error::Partition { k_norm, sum });
        }
        Ok(())
    }

    fn block_coeffs(&self, f: &ScalarField, j: i32) -> Vec<Complex64> {
        let spec = f.spectral();
        let mut out = vec![Complex64::new(0.0, 0.0); spec.len()];
        for &(idx, w) in self.block_entries(j) {
            out[idx] = spec[idx] * w;
        }
        out
    }

    /// `Δ_j f`.
    pub fn dyadic_block(&self, f: &ScalarField, j: i32) -> ScalarField {
        ScalarField::from_spectral(f.grid(), &self.block_coeffs(f, j))
    }

    /// `S_j f`, multiplication by `chi(2^{-j} k)`; defined for every `j`.
    pub fn low_freq_cutoff(&self, f: &ScalarField, j: i32) -> ScalarField {
        let scale = (-j as f64).exp2();
        let knorm = f.grid().k_norms();
        let coeffs: Vec<Complex64> = f
            .spectral()
            .iter()
            .enumerate()
            .map(|(idx, c)| c * chi(scale * knorm[idx]))
            .collect();
        ScalarField::from_spectral(f.grid(), &coeffs)
    }

    /// Keeps the blocks with `|j| <= level`, i.e. `Σ_{|j|<=level} Δ_j f`.
    pub fn truncate(&self, f: &ScalarField, level: i32) -> ScalarField {
        let spec = f.spectral();
        let mut out = vec![Complex64::new(0.0, 0.0); spec.len()];
        for j in self.j_range().filter(|j| j.abs() <= level) {
            for &(idx, w) in self.block_entries(j) {
                out[idx] += spec[idx] * w;
            }
        }
        ScalarField::from_spectral(f.grid(), &out)
    }

    /// Per-block `L^p` norms of a multi-component field (pointwise Euclidean magnitude).
    pub fn block_norms(&self, components: &[&ScalarField], spec: BesovSpec) -> Vec<BlockNorm> {
        let cell = self.grid.cell_volume();
        self.j_range()
            .map(|j| {
                let lp = if components.len() == 1 {
                    let block = self.grid.inverse(&self.block_coeffs(components[0], j));
                    lp_norm(&block, spec.p, cell)
                } else {
                    let mut mag2 = vec![0.0; self.grid.len()];
                    for c in components {
                        let block = self.grid.inverse(&self.block_coeffs(c, j));
                        for (m, b) in mag2.iter_mut().zip(block) {
                            *m += b * b;
                        }
                    }
                    let mag: Vec<f64> = mag2.into_iter().map(f64::sqrt).collect();
                    lp_norm(&mag, spec.p, cell)
                };
                BlockNorm {
                    j,
                    lp,
                    weighted: (j as f64 * spec.s).exp2() * lp,
                }
            })
            .collect()
    }

    /// Homogeneous Besov norm of a scalar field.
    ///
    /// The `k = 0` mode never enters a block; a nonzero mean is reported with a warning.
    pub fn besov_norm(&self, f: &ScalarField, spec: BesovSpec) -> f64 {
        let mean = f.mean();
        if mean.abs() > 1e-12 * f.max_abs().max(1e-300) {
            log::warn!("besov_norm: ignoring nonzero mean {mean:.3e}");
        }
        combine(&self.block_norms(&[f], spec), spec.q)
    }

    /// Homogeneous Besov norm of a vector- or matrix-valued field.
    pub fn besov_norm_multi(&self, components: &[&ScalarField], spec: BesovSpec) -> f64 {
        combine(&self.block_norms(components, spec), spec.q)
    }
}

fn combine(rows: &[BlockNorm], q: f64) -> f64 {
    if q.is_infinite() {
        rows.iter().fold(0.0, |m, r| m.max(r.weighted))
    } else if q == 1.0 {
        rows.iter().map(|r| r.weighted).sum()
    } else {
        rows.iter().map(|r| r.weighted.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Permutation-invariant `L^p` sum: samples are summed in sorted order so that
/// grid-aligned translations give bit-identical results.
fn sorted_lp(values: &mut [f64], p: f64, cell: f64) -> f64 {
    for v in values.iter_mut() {
        *v = v.abs();
    }
    if p.is_infinite() {
        return values.iter().fold(0.0, |m: f64, &v| m.max(v));
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sum: f64 = values.iter().map(|v| v.powf(p)).sum();
    (sum * cell).powf(1.0 / p)
}

/// Finite-difference Besov norm
/// `( ∫ (‖f(·+y) - f‖_p / |y|^s)^q dy/|y|^d )^{1/q}` for `s ∈ (0, 1)`.
///
/// Offsets run over the grid lattice of one period; the cell around `y = 0` is
/// replaced by a ball of equal volume on which `δ_y f ≈ y·∇f`, with `∇f` taken
/// from centered differences.
pub fn besov_norm_fd(f: &ScalarField, spec: BesovSpec) -> Result<f64> {
    if !(spec.s > 0.0 && spec.s < 1.0) {
        return Err(Error::Unsupported(format!(
            "finite-difference Besov norm needs s in (0, 1), got {}",
            spec.s
        )));
    }
    let grid = f.grid();
    let (n, d, h) = (grid.n(), grid.dim(), grid.spacing());
    let cell = grid.cell_volume();
    let vals = f.values();
    let half = n as i64 / 2;
    let wrap = |i: i64| -> usize { i.rem_euclid(n as i64) as usize };

    let shifted_diff = |m: [i64; 2]| -> Vec<f64> {
        (0..grid.len())
            .map(|idx| {
                let target = match d {
                    1 => wrap(idx as i64 + m[0]),
                    _ => {
                        let (r, c) = ((idx / n) as i64, (idx % n) as i64);
                        wrap(r + m[0]) * n + wrap(c + m[1])
                    }
                };
                vals[target] - vals[idx]
            })
            .collect()
    };

    let offsets: Vec<[i64; 2]> = match d {
        1 => (-half..half).filter(|&m| m != 0).map(|m| [m, 0]).collect(),
        _ => (-half..half)
            .flat_map(|a| (-half..half).map(move |b| [a, b]))
            .filter(|m| *m != [0, 0])
            .collect(),
    };

    let mut acc = 0.0;
    let mut sup: f64 = 0.0;
    for m in offsets {
        let r = h * ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
        let mut diff = shifted_diff(m);
        let ratio = sorted_lp(&mut diff, spec.p, cell) / r.powf(spec.s);
        if spec.q.is_infinite() {
            sup = sup.max(ratio);
        } else {
            acc += ratio.powf(spec.q) * r.powf(-(d as f64)) * cell;
        }
    }
    if spec.q.is_infinite() {
        return Ok(sup);
    }

    // central ball, radius chosen to match the excluded cell volume
    let r0 = match d {
        1 => 0.5 * h,
        _ => h / std::f64::consts::PI.sqrt(),
    };
    let centered = |axis: usize| -> Vec<f64> {
        let mut plus = [0i64; 2];
        plus[axis] = 1;
        let fwd = shifted_diff(plus);
        let bwd = shifted_diff([-plus[0], -plus[1]]);
        fwd.iter().zip(&bwd).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let grads: Vec<Vec<f64>> = (0..d).map(centered).collect();
    let directional = |w: [f64; 2]| -> f64 {
        let mut dir: Vec<f64> = (0..grid.len())
            .map(|i| (0..d).map(|a| w[a] * grads[a][i]).sum())
            .collect();
        sorted_lp(&mut dir, spec.p, cell)
    };
    let sphere_integral = match d {
        1 => directional([1.0, 0.0]).powf(spec.q) * 2.0,
        _ => {
            let n_theta = 32;
            let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
            (0..n_theta)
                .map(|i| {
                    let t = i as f64 * dtheta;
                    directional([t.cos(), t.sin()]).powf(spec.q)
                })
                .sum::<f64>()
                * dtheta
        }
    };
    let exponent = spec.q * (1.0 - spec.s);
    acc += sphere_integral * r0.powf(exponent) / exponent;
    Ok(acc.powf(1.0 / spec.q))
}
