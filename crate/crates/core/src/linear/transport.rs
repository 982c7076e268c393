//! Explicit Runge-Kutta stepping of `σ_t + div(u σ) = f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition};
use crate::spectral::{divergence, gradient, product, ScalarField, VectorField};

use super::heat::trapezoid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportStepperConfig {
    pub dt: f64,
    pub rk_order: u8,
    #[serde(default = "default_true")]
    pub dealias_products: bool,
    #[serde(default = "default_cfl")]
    pub cfl_max: f64,
}

fn default_true() -> bool {
    true
}

fn default_cfl() -> f64 {
    0.5
}

impl TransportStepperConfig {
    pub fn new(dt: f64, rk_order: u8) -> Self {
        TransportStepperConfig {
            dt,
            rk_order,
            dealias_products: true,
            cfl_max: default_cfl(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !matches!(self.rk_order, 2..=4) {
            return Err(Error::config(format!(
                "rk_order must be 2, 3 or 4, got {}",
                self.rk_order
            )));
        }
        if !(self.cfl_max > 0.0) {
            return Err(Error::config("cfl_max must be positive"));
        }
        Ok(())
    }
}

/// A coefficient known at the two ends of a step, sampled at a fraction `θ ∈ [0, 1]`.
#[derive(Clone, Copy, Debug)]
pub enum StepSample<'a, T> {
    Frozen(&'a T),
    Linear(&'a T, &'a T),
}

impl<T> StepSample<'_, T> {
    fn endpoints(&self) -> (&T, &T) {
        match *self {
            StepSample::Frozen(a) => (a, a),
            StepSample::Linear(a, b) => (a, b),
        }
    }
}

impl StepSample<'_, VectorField> {
    pub fn at(&self, theta: f64) -> VectorField {
        match *self {
            StepSample::Frozen(a) => a.clone(),
            StepSample::Linear(a, _) if theta == 0.0 => a.clone(),
            StepSample::Linear(_, b) if theta == 1.0 => b.clone(),
            StepSample::Linear(a, b) => a.lin_comb(1.0 - theta, b, theta),
        }
    }
}

impl StepSample<'_, ScalarField> {
    pub fn at(&self, theta: f64) -> ScalarField {
        match *self {
            StepSample::Frozen(a) => a.clone(),
            StepSample::Linear(a, _) if theta == 0.0 => a.clone(),
            StepSample::Linear(_, b) if theta == 1.0 => b.clone(),
            StepSample::Linear(a, b) => a.lin_comb(1.0 - theta, b, theta),
        }
    }
}

/// `max|u| dt / h` over both ends of the step.
pub fn courant_number(u: &StepSample<'_, VectorField>, dt: f64) -> f64 {
    let (a, b) = u.endpoints();
    let umax = a.magnitude().max_abs().max(b.magnitude().max_abs());
    umax * dt / a.grid().spacing()
}

fn rhs(
    sigma: &ScalarField,
    u: &VectorField,
    f: Option<&ScalarField>,
    dealias: bool,
) -> Result<ScalarField> {
    let flux = u.try_map_components(|c| {
        if dealias {
            product(c, sigma)
        } else {
            Ok(c.mul_raw(sigma))
        }
    })?;
    let mut out = divergence(&flux).scale(-1.0);
    if let Some(f) = f {
        out = out.add(f);
    }
    Ok(out)
}

/// One explicit RK step of `σ' = -div(u σ) + f`.
pub fn transport_step(
    sigma: &ScalarField,
    u: StepSample<'_, VectorField>,
    f: Option<StepSample<'_, ScalarField>>,
    cfg: &TransportStepperConfig,
) -> Result<ScalarField> {
    cfg.validate()?;
    let (u0, u1) = u.endpoints();
    u0.check_grid(sigma)?;
    u1.check_grid(sigma)?;
    let courant = courant_number(&u, cfg.dt);
    if courant > cfg.cfl_max {
        return Err(Error::Cfl {
            courant,
            cfl_max: cfg.cfl_max,
            suggested_dt: 0.9 * cfg.dt * cfg.cfl_max / courant,
        });
    }
    let dt = cfg.dt;
    let eval = |s: &ScalarField, theta: f64| -> Result<ScalarField> {
        let ft = f.as_ref().map(|f| f.at(theta));
        rhs(s, &u.at(theta), ft.as_ref(), cfg.dealias_products)
    };
    match cfg.rk_order {
        2 => {
            let k1 = eval(sigma, 0.0)?;
            let k2 = eval(&sigma.lin_comb(1.0, &k1, dt), 1.0)?;
            Ok(sigma.add(&k1.lin_comb(0.5 * dt, &k2, 0.5 * dt)))
        }
        3 => {
            // SSP RK3 written in increment form
            let k1 = eval(sigma, 0.0)?;
            let k2 = eval(&sigma.lin_comb(1.0, &k1, dt), 1.0)?;
            let k12 = k1.add(&k2);
            let k3 = eval(&sigma.lin_comb(1.0, &k12, 0.25 * dt), 0.5)?;
            Ok(sigma.lin_comb(1.0, &k12.lin_comb(1.0, &k3, 4.0), dt / 6.0))
        }
        _ => {
            let k1 = eval(sigma, 0.0)?;
            let k2 = eval(&sigma.lin_comb(1.0, &k1, 0.5 * dt), 0.5)?;
            let k3 = eval(&sigma.lin_comb(1.0, &k2, 0.5 * dt), 0.5)?;
            let k4 = eval(&sigma.lin_comb(1.0, &k3, dt), 1.0)?;
            let incr = k1.add(&k4).lin_comb(1.0, &k2.add(&k3), 2.0);
            Ok(sigma.lin_comb(1.0, &incr, dt / 6.0))
        }
    }
}

/// Outcome of [`transport_estimate_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransportEstimate {
    /// Smallest constant making the a priori bound hold at every sample time.
    pub constant: f64,
    /// Largest excess of `sup ‖σ‖` over `‖σ₀‖ + ∫‖f‖` (the part the constant must absorb).
    pub max_excess: f64,
}

/// Extracts the constant of
/// `sup_{[0,t]} ‖σ‖_{Ḃ¹_{d,1}} ≤ ‖σ₀‖ + ∫₀ᵗ ‖f‖ + C ∫₀ᵗ ‖∇u‖_{Ḃ¹_{d,1}} ‖σ‖_{Ḃ¹_{d,1}}`
/// along a trajectory sampled every `dt`.
///
/// Excess below `rel_floor · ‖σ₀‖` is treated as discretization noise, so
/// flows with `∇u = 0` report `C = 0`.
pub fn transport_estimate_check(
    sigma: &[ScalarField],
    u: &[VectorField],
    f: &[ScalarField],
    dt: f64,
    decomposition: &DyadicDecomposition,
    rel_floor: f64,
) -> Result<TransportEstimate> {
    if sigma.len() != u.len() || sigma.len() != f.len() || sigma.is_empty() {
        return Err(Error::config("trajectory samples must have equal, nonzero length"));
    }
    let d = sigma[0].grid().dim();
    let spec = BesovSpec::critical(1.0, d);
    let s_norm: Vec<f64> = sigma.iter().map(|s| decomposition.besov_norm(s, spec)).collect();
    let f_norm: Vec<f64> = f.iter().map(|s| decomposition.besov_norm(s, spec)).collect();
    let coupling: Vec<f64> = u
        .iter()
        .zip(&s_norm)
        .map(|(v, s)| {
            let grads: Vec<ScalarField> = v
                .components()
                .iter()
                .flat_map(|c| gradient(c).into_components())
                .collect();
            let refs: Vec<&ScalarField> = grads.iter().collect();
            decomposition.besov_norm_multi(&refs, spec) * s
        })
        .collect();
    let floor = rel_floor * s_norm[0];
    let mut sup: f64 = 0.0;
    let mut constant: f64 = 0.0;
    let mut max_excess: f64 = f64::NEG_INFINITY;
    for n in 0..sigma.len() {
        sup = sup.max(s_norm[n]);
        let excess = sup - s_norm[0] - trapezoid(&f_norm[..=n], dt);
        max_excess = max_excess.max(excess);
        if excess <= floor {
            continue;
        }
        let denom = trapezoid(&coupling[..=n], dt);
        constant = constant.max(if denom > 0.0 { excess / denom } else { f64::INFINITY });
    }
    Ok(TransportEstimate { constant, max_excess })
}
