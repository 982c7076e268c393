//! The decoupled fixed-point construction: each iterate solves a forced
//! fractional heat equation driven by the previous iterate, then transports
//! the density with the new velocity.

use serde::Serialize;

use super::{assemble_f, RunConfig, Stepper};
use crate::diagnostics::{gradient_norm, sigma_norm, vector_norm};
use crate::error::Result;
use crate::linear::{fractional_heat_step_vector, transport_step, trapezoid, StepSample};
use crate::littlewood_paley::{build_cutoffs, DyadicDecomposition};
use crate::nonlocal::AlignmentParams;
use crate::spectral::{divergence, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterateRecord {
    pub n: usize,
    /// `‖σⁿ‖_{L^∞_T Ḃ¹_{d,1}}`.
    pub norm_sigma_crit: f64,
    /// `‖uⁿ‖_{L^∞_T Ḃ^{2-α}_{d,1}}`.
    pub norm_u_crit: f64,
    /// `‖uⁿ‖_{L¹_T Ḃ²_{d,1}}`.
    pub norm_u_l1: f64,
    /// `‖∇σⁿ‖_{L^∞_T Ḃ¹_{d,1}}`.
    pub norm_grad_sigma: f64,
    /// `‖∇uⁿ‖_{L^∞_T Ḃ^{2-α}_{d,1}} + ‖∇uⁿ‖_{L¹_T Ḃ²_{d,1}}`.
    pub norm_grad_u: f64,
    /// `δUⁿ_T = ‖uⁿ - uⁿ⁻¹‖_{L¹_T Ḃ²_{d,1}} + ‖uⁿ - uⁿ⁻¹‖_{L^∞_T Ḃ^{2-α}_{d,1}}`; absent for `n = 0`.
    pub delta_u: Option<f64>,
    /// `‖σⁿ - σⁿ⁻¹‖_{L^∞_T Ḃ¹_{d,1}}`; absent for `n = 0`.
    pub delta_sigma: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct IterateOutcome {
    pub records: Vec<IterateRecord>,
    pub converged: bool,
    /// `δUⁿ_T` grew three times in a row.
    pub diverged: bool,
    /// Last iterate at every time level.
    pub sigma: Vec<ScalarField>,
    pub u: Vec<VectorField>,
    pub dt: f64,
}

/// `(Σ_{|j| <= n+n₀} Δ_j σ₀, Σ_{|j| <= n+n₀} Δ_j u₀)`.
pub fn init_truncated_data(
    sigma0: &ScalarField,
    u0: &VectorField,
    n: usize,
    n0: i32,
    dec: &DyadicDecomposition,
) -> (ScalarField, VectorField) {
    let level = n as i32 + n0;
    let s = dec.truncate(sigma0, level);
    let u = u0.map_components(|c| dec.truncate(c, level));
    (s, u)
}

struct Iterate {
    sigma: Vec<ScalarField>,
    u: Vec<VectorField>,
}

fn sup(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, f64::max)
}

fn record(n: usize, it: &Iterate, prev: Option<&Iterate>, alpha: f64, dt: f64, dec: &DyadicDecomposition) -> IterateRecord {
    let s = 2.0 - alpha;
    let u_l1_series: Vec<f64> = it.u.iter().map(|u| vector_norm(dec, u, 2.0)).collect();
    let grad_u = |u: &VectorField, s: f64| {
        let c: Vec<&ScalarField> = u.components().iter().collect();
        gradient_norm(dec, &c, s)
    };
    let grad_u_l1: Vec<f64> = it.u.iter().map(|u| grad_u(u, 2.0)).collect();
    let (delta_u, delta_sigma) = match prev {
        None => (None, None),
        Some(p) => {
            let du: Vec<VectorField> = it.u.iter().zip(&p.u).map(|(a, b)| a.sub(b)).collect();
            let l1: Vec<f64> = du.iter().map(|d| vector_norm(dec, d, 2.0)).collect();
            let linf = sup(du.iter().map(|d| vector_norm(dec, d, s)));
            let ds = sup(it.sigma.iter().zip(&p.sigma).map(|(a, b)| sigma_norm(dec, &a.sub(b), 1.0)));
            (Some(trapezoid(&l1, dt) + linf), Some(ds))
        }
    };
    IterateRecord {
        n,
        norm_sigma_crit: sup(it.sigma.iter().map(|x| sigma_norm(dec, x, 1.0))),
        norm_u_crit: sup(it.u.iter().map(|u| vector_norm(dec, u, s))),
        norm_u_l1: trapezoid(&u_l1_series, dt),
        norm_grad_sigma: sup(it.sigma.iter().map(|x| gradient_norm(dec, &[x], 1.0))),
        norm_grad_u: sup(it.u.iter().map(|u| grad_u(u, s))) + trapezoid(&grad_u_l1, dt),
        delta_u,
        delta_sigma,
    }
}

fn next_iterate(
    prev: &Iterate,
    sigma0: &ScalarField,
    u0: &VectorField,
    params: &AlignmentParams,
    stepper: &Stepper,
) -> Result<Iterate> {
    let steps = prev.u.len() - 1;
    let forcing = prev
        .u
        .iter()
        .zip(&prev.sigma)
        .map(|(u, s)| assemble_f(u, s, params))
        .collect::<Result<Vec<_>>>()?;
    let mut u = Vec::with_capacity(steps + 1);
    u.push(u0.clone());
    for m in 0..steps {
        let next = fractional_heat_step_vector(&u[m], &forcing[m], &forcing[m + 1], &stepper.heat)?;
        u.push(next);
    }
    let source: Vec<ScalarField> = u.iter().map(|v| divergence(v).scale(-1.0)).collect();
    let mut sigma = Vec::with_capacity(steps + 1);
    sigma.push(sigma0.clone());
    for m in 0..steps {
        let next = transport_step(
            &sigma[m],
            StepSample::Linear(&u[m], &u[m + 1]),
            Some(StepSample::Linear(&source[m], &source[m + 1])),
            &stepper.transport,
        )?;
        sigma.push(next);
    }
    Ok(Iterate { sigma, u })
}

/// Runs the scheme on `[t_start, t_final]` from the configured data.
pub fn iterate_scheme(cfg: &RunConfig) -> Result<IterateOutcome> {
    cfg.validate()?;
    let grid = cfg.make_grid()?;
    let dec = build_cutoffs(&grid)?;
    let (sigma0, u0) = cfg.initial_fields(&grid, &dec)?;
    iterate_from(&sigma0, &u0, cfg, &dec)
}

/// Runs the scheme from explicit data; `cfg.initial` is ignored.
pub fn iterate_from(
    sigma0: &ScalarField,
    u0: &VectorField,
    cfg: &RunConfig,
    dec: &DyadicDecomposition,
) -> Result<IterateOutcome> {
    let params = cfg.params()?;
    let stepper = Stepper::from_config(cfg)?;
    let steps = cfg.steps()?;
    let dt = stepper.dt();
    // n₀ unset: truncation above every block of the grid
    let n0 = cfg
        .scheme
        .n0
        .unwrap_or_else(|| dec.j_min().abs().max(dec.j_max().abs()));
    let (s00, _) = init_truncated_data(sigma0, u0, 0, n0, dec);
    let mut current = Iterate {
        sigma: vec![s00; steps + 1],
        u: vec![VectorField::zeros(sigma0.grid()); steps + 1],
    };
    let mut records = vec![record(0, &current, None, params.alpha, dt, dec)];
    let mut converged = false;
    let mut diverged = false;
    let mut rises = 0;
    for n in 1..=cfg.scheme.n_max {
        let (s0n, u0n) = init_truncated_data(sigma0, u0, n, n0, dec);
        let next = next_iterate(&current, &s0n, &u0n, &params, &stepper)?;
        let rec = record(n, &next, Some(&current), params.alpha, dt, dec);
        let du = rec.delta_u.unwrap_or(0.0);
        if let Some(prev) = records.last().and_then(|r| r.delta_u) {
            rises = if du > prev { rises + 1 } else { 0 };
        }
        records.push(rec);
        current = next;
        log::debug!("iterate {n}: δU = {du:.3e}");
        if du < cfg.scheme.stop_tol {
            converged = true;
            break;
        }
        if rises >= 3 {
            diverged = true;
            break;
        }
    }
    Ok(IterateOutcome {
        records,
        converged,
        diverged,
        sigma: current.sigma,
        u: current.u,
        dt,
    })
}
