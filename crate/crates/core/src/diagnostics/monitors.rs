//! Flocking, contraction, scaling and embedding monitors.

use serde::Serialize;

use super::records::{vector_norm, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::euler::{simulate_from, IterateRecord, OutputConfig, RunConfig, SolverState};
use crate::littlewood_paley::{build_cutoffs, DyadicDecomposition};
use crate::spectral::{make_grid, ScalarField, VectorField};

pub const DEFAULT_DECAY_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct FlockingReport {
    /// `(t, ‖u(t)‖_∞)`.
    pub series: Vec<(f64, f64)>,
    pub initial: f64,
    pub last: f64,
    pub decay_fraction: f64,
    pub decayed: bool,
}

pub fn flocking_report(records: &[DiagnosticRecord], decay_fraction: f64) -> Result<FlockingReport> {
    if records.len() < 2 {
        return Err(Error::config("flocking report needs at least two records"));
    }
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.linf_u)).collect();
    let initial = series[0].1;
    let last = series[series.len() - 1].1;
    Ok(FlockingReport {
        series,
        initial,
        last,
        decay_fraction,
        decayed: last <= decay_fraction * initial,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// `δU^{n+1}_T / δU^n_T` for consecutive iterates with `n >= 1`.
    pub ratios_u: Vec<f64>,
    pub ratios_sigma: Vec<f64>,
    /// `exp` of the least-squares slope of `log δU^n_T` against `n`.
    pub fitted_rate: Option<f64>,
    pub contraction: bool,
    /// The last recorded difference is exactly zero.
    pub converged: bool,
}

fn ratios(xs: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .map(|w| if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect()
}

pub fn cauchy_monitor(records: &[IterateRecord]) -> Result<ContractionReport> {
    if records.len() < 3 {
        return Err(Error::config("contraction monitor needs at least three iterates"));
    }
    let du: Vec<f64> = records.iter().filter_map(|r| r.delta_u).collect();
    let ds: Vec<f64> = records.iter().filter_map(|r| r.delta_sigma).collect();
    let ratios_u = ratios(&du);
    let ratios_sigma = ratios(&ds);
    let pts: Vec<(f64, f64)> = du
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    let fitted_rate = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    });
    Ok(ContractionReport {
        contraction: ratios_u.iter().all(|r| *r < 1.0),
        converged: du.last() == Some(&0.0),
        ratios_u,
        ratios_sigma,
        fitted_rate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub lambda: f64,
    /// `λ^{α-1}`.
    pub u_factor: f64,
    /// Largest relative mismatch over matched snapshot times.
    pub mismatch: f64,
    pub compared_times: usize,
}

/// Runs `cfg` and its rescaled copy (`L → L/λ`, `t → t/λ^α`, `u → λ^{α-1} u` on the
/// same sample arrays) and compares them at matched times.
pub fn scaling_check(cfg: &RunConfig, lambda: f64) -> Result<ScalingReport> {
    if !(lambda > 0.0) || lambda.log2().fract() != 0.0 {
        return Err(Error::config(format!(
            "scaling factor must be a power of two, got {lambda}"
        )));
    }
    let alpha = cfg.alignment.alpha;
    let tscale = lambda.powf(alpha);
    let u_factor = lambda.powf(alpha - 1.0);
    let steps = cfg.steps()?;
    let stride = cfg.output.snapshot_every.max(1).min(steps.max(1));
    let mut base_cfg = cfg.clone();
    base_cfg.output = OutputConfig {
        record_every: stride,
        snapshot_every: stride,
    };
    let grid = base_cfg.make_grid()?;
    let dec = build_cutoffs(&grid)?;
    let (sigma0, u0) = base_cfg.initial_fields(&grid, &dec)?;
    let params = base_cfg.params()?;
    let base = simulate_from(
        SolverState::new(cfg.time.t_start, sigma0.clone(), u0.clone(), params)?,
        &base_cfg,
        &dec,
    )?;

    let mut scaled_cfg = base_cfg.clone();
    scaled_cfg.grid.length = cfg.grid.length / lambda;
    scaled_cfg.time.dt = cfg.time.dt / tscale;
    scaled_cfg.time.t_start = cfg.time.t_start / tscale;
    scaled_cfg.time.t_final = scaled_cfg.time.t_start + steps as f64 * scaled_cfg.time.dt;
    let sgrid = make_grid(cfg.grid.d, cfg.grid.n, scaled_cfg.grid.length)?;
    let sdec = build_cutoffs(&sgrid)?;
    let s_sigma = ScalarField::from_values(&sgrid, sigma0.values().to_vec());
    let s_u = VectorField::new(
        u0.components()
            .iter()
            .map(|c| ScalarField::from_values(&sgrid, c.values().iter().map(|v| u_factor * v).collect()))
            .collect(),
    )?;
    let scaled = simulate_from(
        SolverState::new(scaled_cfg.time.t_start, s_sigma, s_u, params)?,
        &scaled_cfg,
        &sdec,
    )?;
    if base.abort.is_some() || scaled.abort.is_some() {
        return Err(Error::domain("a run of the scaling pair aborted"));
    }
    let mut mismatch: f64 = 0.0;
    for (a, b) in base.snapshots.iter().zip(&scaled.snapshots) {
        let ds = max_diff(a.sigma.values(), b.sigma.values()) / a.sigma.max_abs().max(f64::MIN_POSITIVE);
        let mut du: f64 = 0.0;
        for (ca, cb) in a.u.components().iter().zip(b.u.components()) {
            let back: Vec<f64> = cb.values().iter().map(|v| v / u_factor).collect();
            du = du.max(max_diff(ca.values(), &back));
        }
        mismatch = mismatch.max(ds).max(du / a.u.max_abs().max(f64::MIN_POSITIVE));
    }
    Ok(ScalingReport {
        lambda,
        u_factor,
        mismatch,
        compared_times: base.snapshots.len().min(scaled.snapshots.len()),
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `max ‖u - mean(u)‖_∞ / ‖u‖_{Ḃ¹_{d,1}}` over the given states.
pub fn embedding_constant(states: &[SolverState], dec: &DyadicDecomposition) -> f64 {
    states
        .iter()
        .map(|s| {
            let centered = s.u.map_components(|c| c.mean_free());
            let b1 = vector_norm(dec, &s.u, 1.0);
            if b1 == 0.0 {
                0.0
            } else {
                centered.magnitude().max_abs() / b1
            }
        })
        .fold(0.0, f64::max)
}
