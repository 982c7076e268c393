//! Exponential integrator for `u_t + μ (-Δ)^{α/2} u = f`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition};
use crate::spectral::{homogeneous_symbol, ScalarField, VectorField};

/// Below this `|z|` the φ-functions switch to their Taylor series.
const SERIES_SWITCH: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatStepperConfig {
    pub mu: f64,
    pub alpha: f64,
    pub dt: f64,
    /// 1: exponential Euler on `f_now`; 2: exponential trapezoid between `f_now` and `f_next`.
    pub duhamel_rule: u8,
}

impl HeatStepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::config(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::config(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !matches!(self.duhamel_rule, 1 | 2) {
            return Err(Error::config(format!(
                "duhamel_rule must be 1 or 2, got {}",
                self.duhamel_rule
            )));
        }
        Ok(())
    }
}

/// `(e^z, φ1(z), φ2(z))` with `φ1 = (e^z - 1)/z`, `φ2 = (e^z - 1 - z)/z²`.
pub fn phi_functions(z: f64) -> (f64, f64, f64) {
    let ez = z.exp();
    if z.abs() < SERIES_SWITCH {
        // Σ z^j/(j+1)! and Σ z^j/(j+2)!, six terms each
        let (mut p1, mut p2) = (0.0, 0.0);
        let mut term1 = 1.0;
        let mut term2 = 0.5;
        for j in 0..6 {
            p1 += term1;
            p2 += term2;
            term1 *= z / (j + 2) as f64;
            term2 *= z / (j + 3) as f64;
        }
        (ez, p1, p2)
    } else {
        let em1 = z.exp_m1();
        (ez, em1 / z, (em1 - z) / (z * z))
    }
}

/// One step of the Duhamel formula, exact for the linear part of every mode.
///
/// `f_next` is read only by the second-order rule.
pub fn fractional_heat_step(
    u: &ScalarField,
    f_now: &ScalarField,
    f_next: &ScalarField,
    cfg: &HeatStepperConfig,
) -> Result<ScalarField> {
    cfg.validate()?;
    u.check_grid(f_now)?;
    u.check_grid(f_next)?;
    let grid = u.grid().clone();
    let knorm = grid.k_norms();
    let uh = u.spectral();
    let fn_h = f_now.spectral();
    let fx_h = if cfg.duhamel_rule == 2 { f_next.spectral() } else { fn_h };
    let dt = cfg.dt;
    let out: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let lambda = cfg.mu * homogeneous_symbol(knorm[idx], cfg.alpha);
            let (ez, p1, p2) = phi_functions(-lambda * dt);
            match cfg.duhamel_rule {
                1 => uh[idx] * ez + fn_h[idx] * (dt * p1),
                _ => uh[idx] * ez + fn_h[idx] * (dt * (p1 - p2)) + fx_h[idx] * (dt * p2),
            }
        })
        .collect();
    Ok(ScalarField::from_spectral(&grid, &out))
}

/// Componentwise [`fractional_heat_step`].
pub fn fractional_heat_step_vector(
    u: &VectorField,
    f_now: &VectorField,
    f_next: &VectorField,
    cfg: &HeatStepperConfig,
) -> Result<VectorField> {
    let comps = (0..u.dim())
        .map(|i| fractional_heat_step(u.component(i), f_now.component(i), f_next.component(i), cfg))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// Marches `steps` steps from `u0` with forcing `forcing(t)`; returns all `steps + 1` states.
pub fn fractional_heat_solve(
    u0: &ScalarField,
    forcing: &dyn Fn(f64) -> ScalarField,
    steps: usize,
    cfg: &HeatStepperConfig,
) -> Result<Vec<ScalarField>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(u0.clone());
    let mut f_now = forcing(0.0);
    for n in 0..steps {
        let f_next = forcing((n + 1) as f64 * cfg.dt);
        let next = fractional_heat_step(&out[n], &f_now, &f_next, cfg)?;
        out.push(next);
        f_now = f_next;
    }
    Ok(out)
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum RegularityRatio {
    Defined(f64),
    /// Both data norms vanish.
    Undefined,
}

impl RegularityRatio {
    pub fn value(&self) -> Option<f64> {
        match self {
            RegularityRatio::Defined(v) => Some(*v),
            RegularityRatio::Undefined => None,
        }
    }
}

/// `(‖u‖_{L¹_T Ḃ^{s+α}_{d,1}} + ‖u‖_{L^∞_T Ḃ^s_{d,1}}) / (‖u₀‖_{Ḃ^s_{d,1}} + ‖f‖_{L¹_T Ḃ^s_{d,1}})`
/// with `s = 2 - α`, for the solution started from `u0` and driven by `forcing`.
pub fn maximal_regularity_ratio(
    u0: &ScalarField,
    forcing: &dyn Fn(f64) -> ScalarField,
    t_final: f64,
    cfg: &HeatStepperConfig,
    decomposition: &DyadicDecomposition,
) -> Result<RegularityRatio> {
    cfg.validate()?;
    let steps = (t_final / cfg.dt).round();
    if steps < 1.0 || (steps * cfg.dt - t_final).abs() > 1e-9 * t_final {
        return Err(Error::config(format!(
            "T = {t_final} is not a positive multiple of dt = {}",
            cfg.dt
        )));
    }
    let steps = steps as usize;
    let d = u0.grid().dim();
    let s = 2.0 - cfg.alpha;
    let low = BesovSpec::critical(s, d);
    let high = BesovSpec::critical(s + cfg.alpha, d);
    let traj = fractional_heat_solve(u0, forcing, steps, cfg)?;
    let high_series: Vec<f64> = traj.iter().map(|u| decomposition.besov_norm(u, high)).collect();
    let sup = traj
        .iter()
        .map(|u| decomposition.besov_norm(u, low))
        .fold(0.0, f64::max);
    let f_series: Vec<f64> = (0..=steps)
        .map(|n| decomposition.besov_norm(&forcing(n as f64 * cfg.dt), low))
        .collect();
    let denom = decomposition.besov_norm(u0, low) + trapezoid(&f_series, cfg.dt);
    if denom == 0.0 {
        return Ok(RegularityRatio::Undefined);
    }
    Ok(RegularityRatio::Defined((trapezoid(&high_series, cfg.dt) + sup) / denom))
}

/// Least-squares fit of `log ‖e^{-tμΛ^α} Δ_j u‖_p ≈ log C - c 2^{jα} t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BernsteinFit {
    pub j: i32,
    pub c: f64,
    pub prefactor: f64,
    /// Smallest and largest `μ|k|^α / 2^{jα}` over the modes carried by block `j`.
    pub rate_bounds: (f64, f64),
}

pub fn bernstein_decay_fit(
    f: &ScalarField,
    j: i32,
    mu: f64,
    alpha: f64,
    p: f64,
    times: &[f64],
    decomposition: &DyadicDecomposition,
) -> Result<BernsteinFit> {
    if times.len() < 2 {
        return Err(Error::config("decay fit needs at least two sample times"));
    }
    let block = decomposition.dyadic_block(f, j);
    let grid = f.grid().clone();
    let scale = (j as f64 * alpha).exp2();
    let knorm = grid.k_norms();
    let mut bounds = (f64::INFINITY, 0.0f64);
    for (idx, c) in block.spectral().iter().enumerate() {
        if c.norm() > 1e-14 * block.max_abs().max(f64::MIN_POSITIVE) && knorm[idx] > 0.0 {
            let r = mu * homogeneous_symbol(knorm[idx], alpha) / scale;
            bounds.0 = bounds.0.min(r);
            bounds.1 = bounds.1.max(r);
        }
    }
    if bounds.1 == 0.0 {
        return Err(Error::domain(format!("block {j} of the data is empty")));
    }
    let xs: Vec<f64> = times.iter().map(|t| scale * t).collect();
    let ys: Vec<f64> = times
        .iter()
        .map(|&t| {
            let evolved = crate::spectral::apply_radial(&block, |k| {
                (-mu * homogeneous_symbol(k, alpha) * t).exp()
            });
            evolved.lp_norm(p).ln()
        })
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(BernsteinFit {
        j,
        c: -slope,
        prefactor: (intercept - block.lp_norm(p).ln()).exp(),
        rate_bounds: bounds,
    })
}
