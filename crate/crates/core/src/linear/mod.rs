//! Linear building blocks: the forced fractional heat equation and the
//! continuity equation with a prescribed velocity.

mod heat;
mod transport;

pub use heat::{
    bernstein_decay_fit, fractional_heat_solve, fractional_heat_step, fractional_heat_step_vector,
    maximal_regularity_ratio, phi_functions, trapezoid, BernsteinFit, HeatStepperConfig,
    RegularityRatio,
};
pub use transport::{
    courant_number, transport_estimate_check, transport_step, StepSample, TransportEstimate,
    TransportStepperConfig,
};
