//! The coupled density/velocity system
//! `σ_t + div(σu) = -div u`, `u_t + μ(-Δ)^{α/2}u = F(u, σ)`: right-hand side
//! assembly, a direct exponential time integrator, the decoupled iterative
//! scheme and the smallness gates on the data.

mod config;
mod gates;
mod iterate;
mod simulate;

use crate::error::{Error, Result};
use crate::linear::{
    fractional_heat_step_vector, transport_step, HeatStepperConfig, StepSample,
    TransportStepperConfig,
};
use crate::nonlocal::{i_alpha, AlignmentParams};
use crate::spectral::{
    advect, divergence, fractional_laplacian, scalar_times_vector, ScalarField, VectorField,
};

pub use config::{
    AlignmentConfig, GateConfig, GridConfig, InitialData, ModeSpec, OutputConfig, RunConfig,
    SchemeConfig, SchemeKind, TimeConfig,
};
pub use gates::{local_horizon, smallness_gates, GateReport};
pub use iterate::{init_truncated_data, iterate_from, iterate_scheme, IterateOutcome, IterateRecord};
pub use simulate::{simulate, simulate_from, Abort, Trajectory};

#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    /// Density fluctuation `ρ - 1`.
    pub sigma: ScalarField,
    pub u: VectorField,
    pub params: AlignmentParams,
}

impl SolverState {
    pub fn new(t: f64, sigma: ScalarField, u: VectorField, params: AlignmentParams) -> Result<Self> {
        u.check_grid(&sigma)?;
        let state = SolverState { t, sigma, u, params };
        state.check()?;
        Ok(state)
    }

    /// Finite fields and positive density.
    pub fn check(&self) -> Result<()> {
        if !self.sigma.is_finite() || !self.u.is_finite() {
            return Err(Error::domain(format!("non-finite field at t = {}", self.t)));
        }
        let min = self.sigma.min();
        if !(min > -1.0) {
            return Err(Error::domain(format!(
                "density 1 + σ reached {:.3e} at t = {}",
                1.0 + min,
                self.t
            )));
        }
        Ok(())
    }

    pub fn density(&self) -> ScalarField {
        self.sigma.map(|s| 1.0 + s)
    }
}

/// The three terms of `F(u, σ)`.
#[derive(Clone, Debug)]
pub struct ForceTerms {
    /// `I_α(u, σ)`.
    pub leibniz: VectorField,
    /// `-μ σ (-Δ)^{α/2} u`.
    pub weighted_diffusion: VectorField,
    /// `-(u·∇)u`.
    pub advection: VectorField,
}

impl ForceTerms {
    pub fn total(&self) -> VectorField {
        self.leibniz.add(&self.weighted_diffusion).add(&self.advection)
    }
}

pub fn assemble_terms(u: &VectorField, sigma: &ScalarField, params: &AlignmentParams) -> Result<ForceTerms> {
    u.check_grid(sigma)?;
    let lap_u = u.try_map_components(|c| fractional_laplacian(c, params.alpha))?;
    Ok(ForceTerms {
        leibniz: i_alpha(u, sigma, params)?,
        weighted_diffusion: scalar_times_vector(sigma, &lap_u)?.scale(-params.mu),
        advection: advect(u, u)?.scale(-1.0),
    })
}

/// `F(u, σ) = I_α(u, σ) - μ σ (-Δ)^{α/2} u - (u·∇)u`.
pub fn assemble_f(u: &VectorField, sigma: &ScalarField, params: &AlignmentParams) -> Result<VectorField> {
    Ok(assemble_terms(u, sigma, params)?.total())
}

/// Time-stepping parameters shared by the direct and iterative solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stepper {
    pub heat: HeatStepperConfig,
    pub transport: TransportStepperConfig,
}

impl Stepper {
    pub fn new(params: &AlignmentParams, dt: f64, duhamel_rule: u8, rk_order: u8, cfl_max: f64) -> Result<Self> {
        let heat = HeatStepperConfig {
            mu: params.mu,
            alpha: params.alpha,
            dt,
            duhamel_rule,
        };
        heat.validate()?;
        let transport = TransportStepperConfig {
            dt,
            rk_order,
            dealias_products: true,
            cfl_max,
        };
        transport.validate()?;
        Ok(Stepper { heat, transport })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let t = &cfg.time;
        Stepper::new(&cfg.params()?, t.dt, t.duhamel_rule, t.rk_order, t.cfl_max)
    }

    pub fn dt(&self) -> f64 {
        self.heat.dt
    }

    fn with_rule(&self, rule: u8) -> HeatStepperConfig {
        HeatStepperConfig {
            duhamel_rule: rule,
            ..self.heat
        }
    }
}

fn neg_div(u: &VectorField) -> ScalarField {
    divergence(u).scale(-1.0)
}

/// One step of the coupled system.
///
/// Rule 1 freezes the partner field at the old time level. Rule 2 predicts
/// `(u*, σ*)` with rule 1, then corrects the velocity with the exponential
/// trapezoid on `F(u_n, σ_n)` and `F(u*, σ*)` and transports `σ` with the
/// velocity interpolated between `u_n` and the corrected `u_{n+1}`.
pub fn direct_step(state: &SolverState, stepper: &Stepper) -> Result<SolverState> {
    let params = &state.params;
    let (sigma, u) = (&state.sigma, &state.u);
    let f_now = assemble_f(u, sigma, params)?;
    let div_now = neg_div(u);
    let (sigma_next, u_next) = match stepper.heat.duhamel_rule {
        1 => {
            let u1 = fractional_heat_step_vector(u, &f_now, &f_now, &stepper.heat)?;
            let s1 = transport_step(
                sigma,
                StepSample::Frozen(u),
                Some(StepSample::Frozen(&div_now)),
                &stepper.transport,
            )?;
            (s1, u1)
        }
        _ => {
            let u_pred = fractional_heat_step_vector(u, &f_now, &f_now, &stepper.with_rule(1))?;
            let div_pred = neg_div(&u_pred);
            let s_pred = transport_step(
                sigma,
                StepSample::Linear(u, &u_pred),
                Some(StepSample::Linear(&div_now, &div_pred)),
                &stepper.transport,
            )?;
            let f_pred = assemble_f(&u_pred, &s_pred, params)?;
            let u1 = fractional_heat_step_vector(u, &f_now, &f_pred, &stepper.heat)?;
            let div1 = neg_div(&u1);
            let s1 = transport_step(
                sigma,
                StepSample::Linear(u, &u1),
                Some(StepSample::Linear(&div_now, &div1)),
                &stepper.transport,
            )?;
            (s1, u1)
        }
    };
    SolverState::new(state.t + stepper.dt(), sigma_next, u_next, *params)
}
