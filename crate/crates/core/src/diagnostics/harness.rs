//! Randomized estimation of the constants in the product, commutator and
//! Leibniz-defect inequalities.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::records::vector_norm;
use crate::error::{Error, Result};
use crate::littlewood_paley::{build_cutoffs, BesovSpec, DyadicDecomposition};
use crate::nonlocal::{i_alpha, AlignmentParams};
use crate::random::{band_limited_field, band_limited_vector, stream_rng};
use crate::spectral::{advect_scalar, gradient, make_grid, product, Grid, ScalarField, VectorField};

/// Largest per-refinement growth of an empirical constant that still counts as stable.
pub const GROWTH_LIMIT: f64 = 0.25;

#[derive(Clone, Debug, Serialize)]
pub struct HarnessConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub d: usize,
    pub alpha: f64,
    pub length: f64,
    /// Grid sizes, coarsest first.
    pub ladder: Vec<usize>,
    /// Highest mode of the random fields; products stay resolved when it is at most `N/6`.
    pub m_max: usize,
}

impl HarnessConfig {
    pub fn new(seed: u64, n_samples: usize, d: usize, alpha: f64, ladder: Vec<usize>) -> Self {
        let m_max = ladder.first().map_or(1, |n| (n / 6).max(1));
        HarnessConfig {
            seed,
            n_samples,
            d,
            alpha,
            length: 2.0 * std::f64::consts::PI,
            ladder,
            m_max,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub id: String,
    pub sample_count: usize,
    /// Maximum ratio over all samples and grids.
    pub constant: f64,
    /// `(N, max ratio)` per grid of the ladder.
    pub per_resolution: Vec<(usize, f64)>,
    pub worst_sample: String,
    /// Some refinement raised the constant by more than [`GROWTH_LIMIT`].
    pub unstable: bool,
}

impl InequalityReport {
    pub fn max_growth(&self) -> f64 {
        self.per_resolution
            .windows(2)
            .map(|w| w[1].1 / w[0].1 - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Left over right side; an exact zero on the left counts as ratio zero.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

struct Sample {
    a: ScalarField,
    b: ScalarField,
    w: VectorField,
}

/// Two scalar fields and a vector field drawn from stream `stream`; shape
/// parameters come from the same stream so they do not depend on the grid.
fn draw(grid: &Arc<Grid>, seed: u64, stream: u64, m_max: usize) -> Result<Sample> {
    let mut rng = stream_rng(seed, stream);
    let ma = rng.random_range(1..=m_max);
    let mb = rng.random_range(1..=m_max);
    let mw = rng.random_range(1..=m_max);
    let da = rng.random_range(0.0..3.0);
    let db = rng.random_range(0.0..3.0);
    let dw = rng.random_range(0.0..3.0);
    Ok(Sample {
        a: band_limited_field(grid, &mut rng, ma, da)?,
        b: band_limited_field(grid, &mut rng, mb, db)?,
        w: band_limited_vector(grid, &mut rng, mw, dw)?,
    })
}

/// One inequality: name and ratio of a sample on a given decomposition.
type Check = (String, Box<dyn Fn(&Sample, &DyadicDecomposition) -> Result<f64> + Sync>);

fn crit(s: f64, d: usize) -> BesovSpec {
    BesovSpec::critical(s, d)
}

fn norm(dec: &DyadicDecomposition, f: &ScalarField, s: f64) -> f64 {
    dec.besov_norm_multi(&[f], crit(s, dec.grid().dim()))
}

fn checks(params: AlignmentParams) -> Vec<Check> {
    let alpha = params.alpha;
    let mut out: Vec<Check> = Vec::new();
    out.push((
        "product_b1".into(),
        Box::new(|s: &Sample, dec: &DyadicDecomposition| {
            let uv = product(&s.a, &s.b)?;
            Ok(ratio(norm(dec, &uv, 1.0), norm(dec, &s.a, 1.0) * norm(dec, &s.b, 1.0)))
        }),
    ));
    out.push((
        "product_b1_square".into(),
        Box::new(|s: &Sample, dec: &DyadicDecomposition| {
            let ff = product(&s.a, &s.a)?;
            Ok(ratio(norm(dec, &ff, 1.0), norm(dec, &s.a, 1.0).powi(2)))
        }),
    ));
    for theta in [0.0, 0.5 * (alpha - 1.0), alpha - 1.0] {
        out.push((
            format!("product_fractional_theta_{theta:.4}"),
            Box::new(move |s: &Sample, dec: &DyadicDecomposition| {
                let uv = product(&s.a, &s.b)?;
                Ok(ratio(
                    norm(dec, &uv, 2.0 - alpha),
                    norm(dec, &s.a, 1.0 - theta) * norm(dec, &s.b, 2.0 + theta - alpha),
                ))
            }),
        ));
    }
    for sm in [2.0 - alpha, 1.0] {
        out.push((
            format!("commutator_s_{sm:.4}"),
            Box::new(move |s: &Sample, dec: &DyadicDecomposition| {
                let lhs = commutator_sum(&s.w, &s.a, sm, dec)?;
                let gw: Vec<ScalarField> =
                    s.w.components().iter().flat_map(|c| gradient(c).into_components()).collect();
                let refs: Vec<&ScalarField> = gw.iter().collect();
                let grad_w = dec.besov_norm_multi(&refs, crit(1.0, dec.grid().dim()));
                Ok(ratio(lhs, grad_w * norm(dec, &s.a, sm)))
            }),
        ));
    }
    let m = (2.0 - alpha).min(alpha - 1.0);
    for theta in [0.0, 0.5 * m, m] {
        out.push((
            format!("leibniz_defect_theta_{theta:.4}"),
            Box::new(move |s: &Sample, dec: &DyadicDecomposition| {
                let lhs = vector_norm(dec, &i_alpha(&s.w, &s.a, &params)?, 2.0 - alpha);
                let gw: Vec<ScalarField> =
                    s.w.components().iter().flat_map(|c| gradient(c).into_components()).collect();
                let refs: Vec<&ScalarField> = gw.iter().collect();
                let grad_u = dec.besov_norm_multi(&refs, crit(1.0 - theta, dec.grid().dim()));
                Ok(ratio(lhs, grad_u * norm(dec, &s.a, 1.0 + theta)))
            }),
        ));
    }
    out
}

/// `Σ_j 2^{js} ‖w·∇Δ_j u - Δ_j(w·∇u)‖_{L^d}`.
pub fn commutator_sum(w: &VectorField, u: &ScalarField, s: f64, dec: &DyadicDecomposition) -> Result<f64> {
    let d = dec.grid().dim() as f64;
    let transported = advect_scalar(w, u)?;
    let mut total = 0.0;
    for j in dec.j_range() {
        let r = advect_scalar(w, &dec.dyadic_block(u, j))?.sub(&dec.dyadic_block(&transported, j));
        total += (j as f64 * s).exp2() * r.lp_norm(d);
    }
    Ok(total)
}

/// Runs every inequality on every grid of the ladder.
pub fn inequality_harness(cfg: &HarnessConfig) -> Result<Vec<InequalityReport>> {
    let params = AlignmentParams::new(cfg.d, cfg.alpha)?;
    if cfg.ladder.is_empty() || cfg.n_samples == 0 {
        return Err(Error::config("harness needs a nonempty grid ladder and at least one sample"));
    }
    let coarsest = *cfg.ladder.iter().min().unwrap();
    if 6 * cfg.m_max > coarsest {
        return Err(Error::config(format!(
            "m_max = {} leaves products unresolved on N = {coarsest}",
            cfg.m_max
        )));
    }
    let checks = checks(params);
    let mut per_check: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); checks.len()];
    for &n in &cfg.ladder {
        let grid = make_grid(cfg.d, n, cfg.length)?;
        let dec = build_cutoffs(&grid)?;
        let rows: Vec<Vec<f64>> = (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| {
                let sample = draw(&grid, cfg.seed, i as u64, cfg.m_max)?;
                checks.iter().map(|(_, f)| f(&sample, &dec)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, slot) in per_check.iter_mut().enumerate() {
            let (worst, value) = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r[c]))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            slot.push((n, value, worst));
        }
    }
    Ok(checks
        .iter()
        .zip(per_check)
        .map(|((id, _), rows)| {
            let (n_worst, constant, i_worst) = rows
                .iter()
                .copied()
                .fold((0, f64::NEG_INFINITY, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let per_resolution: Vec<(usize, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
            let unstable = per_resolution
                .windows(2)
                .any(|w| !(w[1].1 <= (1.0 + GROWTH_LIMIT) * w[0].1));
            InequalityReport {
                id: id.clone(),
                sample_count: cfg.n_samples,
                constant,
                per_resolution,
                worst_sample: format!("seed={} stream={i_worst} N={n_worst}", cfg.seed),
                unstable,
            }
        })
        .collect())
}
