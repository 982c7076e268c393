//! Time march of the coupled system with per-step diagnostics.

use serde::Serialize;

use super::{direct_step, RunConfig, SolverState, Stepper};
use crate::diagnostics::{fill_residuals, record_state, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::littlewood_paley::{build_cutoffs, DyadicDecomposition};

/// Why a run stopped before `t_final`.
#[derive(Clone, Debug, Serialize)]
pub struct Abort {
    pub t: f64,
    pub reason: String,
    /// Exit-status class: true for CFL rejections, false for loss of positivity or finiteness.
    pub cfl: bool,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticRecord>,
    /// States every `snapshot_every` steps (always including the initial one).
    pub snapshots: Vec<SolverState>,
    /// Last state reached; on abort this is the state that could not be advanced.
    pub final_state: SolverState,
    pub steps_taken: usize,
    pub abort: Option<Abort>,
}

/// Runs the configured problem from its initial data.
pub fn simulate(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = cfg.make_grid()?;
    let dec = build_cutoffs(&grid)?;
    let (sigma, u) = cfg.initial_fields(&grid, &dec)?;
    let state = SolverState::new(cfg.time.t_start, sigma, u, cfg.params()?)?;
    simulate_from(state, cfg, &dec)
}

/// Runs `cfg.steps()` steps from `state`.
pub fn simulate_from(state: SolverState, cfg: &RunConfig, dec: &DyadicDecomposition) -> Result<Trajectory> {
    let stepper = Stepper::from_config(cfg)?;
    let steps = cfg.steps()?;
    let record_every = cfg.output.record_every;
    let snap_every = cfg.output.snapshot_every;
    let mut records = vec![record_state(&state, dec)?];
    let mut snapshots = vec![state.clone()];
    let mut current = state;
    let mut abort = None;
    let mut taken = 0;
    let t0 = current.t;
    for n in 1..=steps {
        match direct_step(&current, &stepper) {
            Ok(mut next) => {
                // avoid drift of the time label from repeated addition
                next.t = t0 + n as f64 * stepper.dt();
                current = next;
                taken = n;
            }
            Err(e @ (Error::Domain(_) | Error::Cfl { .. })) => {
                log::warn!("run aborted at t = {}: {e}", current.t);
                abort = Some(Abort {
                    t: current.t,
                    reason: e.to_string(),
                    cfl: matches!(e, Error::Cfl { .. }),
                });
                break;
            }
            Err(e) => return Err(e),
        }
        if n % record_every == 0 || n == steps {
            records.push(record_state(&current, dec)?);
        }
        if snap_every > 0 && n % snap_every == 0 {
            snapshots.push(current.clone());
        }
    }
    fill_residuals(&mut records);
    Ok(Trajectory {
        records,
        snapshots,
        final_state: current,
        steps_taken: taken,
        abort,
    })
}
