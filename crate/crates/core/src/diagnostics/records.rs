//! Per-state diagnostic records and the kinetic-energy balance.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::euler::SolverState;
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition};
use crate::nonlocal::alignment_force;
use crate::spectral::{gradient, ScalarField, VectorField};

/// One row of the diagnostics CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `∫ ρ|u|²`.
    pub kinetic: f64,
    /// `∫∫ |u(x) - u(y)|² ρ(x)ρ(y) / |x - y|^{d+α}`, from the force inner product.
    pub dissipation: f64,
    /// `dK/dt + D` with the time derivative from neighbouring records.
    pub residual: f64,
    pub linf_u: f64,
    pub crit_sigma: f64,
    pub crit_u: f64,
    pub high_sigma: f64,
    pub high_u: f64,
    pub mean_sigma: f64,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "t",
    "kinetic",
    "dissipation",
    "residual",
    "linf_u",
    "crit_sigma",
    "crit_u",
    "high_sigma",
    "high_u",
    "mean_sigma",
];

impl DiagnosticRecord {
    pub fn row(&self) -> [f64; 10] {
        [
            self.t,
            self.kinetic,
            self.dissipation,
            self.residual,
            self.linf_u,
            self.crit_sigma,
            self.crit_u,
            self.high_sigma,
            self.high_u,
            self.mean_sigma,
        ]
    }
}

/// `‖u‖_{Ḃ^s_{d,1}}` of a vector field (pointwise Euclidean magnitude per block).
pub fn vector_norm(dec: &DyadicDecomposition, u: &VectorField, s: f64) -> f64 {
    let refs: Vec<&ScalarField> = u.components().iter().collect();
    dec.besov_norm_multi(&refs, BesovSpec::critical(s, u.dim()))
}

/// `‖∇f‖_{Ḃ^s_{d,1}}` with the Frobenius magnitude for vector `f`.
pub fn gradient_norm(dec: &DyadicDecomposition, f: &[&ScalarField], s: f64) -> f64 {
    let grads: Vec<ScalarField> = f.iter().flat_map(|c| gradient(c).into_components()).collect();
    let refs: Vec<&ScalarField> = grads.iter().collect();
    dec.besov_norm_multi(&refs, BesovSpec::critical(s, dec.grid().dim()))
}

/// `‖σ‖_{Ḃ¹_{d,1}}` without the mean warning (the mean never enters a block).
pub fn sigma_norm(dec: &DyadicDecomposition, sigma: &ScalarField, s: f64) -> f64 {
    dec.besov_norm_multi(&[sigma], BesovSpec::critical(s, sigma.grid().dim()))
}

/// `(∫ρ|u|², -2∫ρ u·A(ρ, u))` where `A` is the alignment force per unit mass.
pub fn energy_terms(state: &SolverState) -> Result<(f64, f64)> {
    let rho = state.density();
    let u = &state.u;
    let grid = rho.grid();
    let force = alignment_force(&rho, u, &state.params)?;
    let mut kinetic = 0.0;
    let mut work = 0.0;
    for x in 0..grid.len() {
        let mut u2 = 0.0;
        let mut ua = 0.0;
        for c in 0..u.dim() {
            let v = u.component(c).values()[x];
            u2 += v * v;
            ua += v * force.component(c).values()[x];
        }
        kinetic += rho.values()[x] * u2;
        work += rho.values()[x] * ua;
    }
    let vol = grid.cell_volume();
    Ok((kinetic * vol, -2.0 * work * vol))
}

/// Record for one state; `residual` is left at zero until [`fill_residuals`].
pub fn record_state(state: &SolverState, dec: &DyadicDecomposition) -> Result<DiagnosticRecord> {
    let (kinetic, dissipation) = energy_terms(state)?;
    let alpha = state.params.alpha;
    let ucomp: Vec<&ScalarField> = state.u.components().iter().collect();
    Ok(DiagnosticRecord {
        t: state.t,
        kinetic,
        dissipation,
        residual: 0.0,
        linf_u: state.u.magnitude().max_abs(),
        crit_sigma: sigma_norm(dec, &state.sigma, 1.0),
        crit_u: vector_norm(dec, &state.u, 2.0 - alpha),
        high_sigma: gradient_norm(dec, &[&state.sigma], 1.0),
        high_u: gradient_norm(dec, &ucomp, 2.0 - alpha),
        mean_sigma: state.sigma.mean(),
    })
}

/// Sets `residual = dK/dt + D`, with centered differences inside and one-sided ones at the ends.
pub fn fill_residuals(records: &mut [DiagnosticRecord]) {
    let n = records.len();
    if n < 2 {
        return;
    }
    let k: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.kinetic)).collect();
    for i in 0..n {
        let (a, b) = match i {
            0 => (0, 1),
            _ if i == n - 1 => (n - 2, n - 1),
            _ => (i - 1, i + 1),
        };
        let rate = (k[b].1 - k[a].1) / (k[b].0 - k[a].0);
        records[i].residual = rate + records[i].dissipation;
    }
}

/// `(kinetic, dissipation, residual)` for every state of an evenly spaced sequence.
pub fn energy_balance(states: &[SolverState], dec: &DyadicDecomposition) -> Result<Vec<(f64, f64, f64)>> {
    let mut recs = states
        .iter()
        .map(|s| record_state(s, dec))
        .collect::<Result<Vec<_>>>()?;
    fill_residuals(&mut recs);
    Ok(recs.iter().map(|r| (r.kinetic, r.dissipation, r.residual)).collect())
}
