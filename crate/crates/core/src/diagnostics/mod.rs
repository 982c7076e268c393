//! Numerical witnesses for the analytical statements: energy balance,
//! flocking, contraction of the iterative scheme, scaling invariance and the
//! randomized functional-inequality harness.

mod harness;
mod monitors;
mod output;
mod records;

pub use harness::{
    commutator_sum, inequality_harness, ratio, HarnessConfig, InequalityReport, GROWTH_LIMIT,
};
pub use monitors::{
    cauchy_monitor, embedding_constant, flocking_report, scaling_check, ContractionReport,
    FlockingReport, ScalingReport, DEFAULT_DECAY_FRACTION,
};
pub use output::{write_diagnostics_csv, write_iterate_csv};
pub use records::{
    energy_balance, energy_terms, fill_residuals, gradient_norm, record_state, sigma_norm,
    vector_norm, DiagnosticRecord, CSV_COLUMNS,
};
