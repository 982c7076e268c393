//! Run configuration, deserialized from TOML.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition};
use crate::nonlocal::AlignmentParams;
use crate::random::{band_limited_field, band_limited_vector, stream_rng};
use crate::spectral::{make_grid, snapshot, Grid, ScalarField, VectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_dim")]
    pub d: usize,
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_dim() -> usize {
    1
}

fn default_length() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentConfig {
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub t_start: f64,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_rule")]
    pub duhamel_rule: u8,
    #[serde(default = "default_rk")]
    pub rk_order: u8,
    #[serde(default = "default_cfl")]
    pub cfl_max: f64,
}

fn default_rule() -> u8 {
    2
}

fn default_rk() -> u8 {
    4
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Direct,
    Iterate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default = "default_kind")]
    pub kind: SchemeKind,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Truncation offset; `None` keeps every block of the grid.
    #[serde(default)]
    pub n0: Option<i32>,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
}

fn default_kind() -> SchemeKind {
    SchemeKind::Direct
}

fn default_n_max() -> usize {
    20
}

fn default_stop_tol() -> f64 {
    1e-8
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: default_kind(),
            n_max: default_n_max(),
            n0: None,
            stop_tol: default_stop_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    #[serde(default = "default_gate")]
    pub epsilon: f64,
    #[serde(default = "default_gate")]
    pub eta: f64,
}

fn default_gate() -> f64 {
    1e-2
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            epsilon: default_gate(),
            eta: default_gate(),
        }
    }
}

/// `amplitude · cos(2π m·x / L + phase)` added to one field component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub m: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    /// Velocity component; ignored for the density.
    #[serde(default)]
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Modes {
        #[serde(default)]
        sigma: Vec<ModeSpec>,
        #[serde(default)]
        u: Vec<ModeSpec>,
    },
    /// Random band-limited data rescaled to prescribed critical norms
    /// `‖σ₀‖_{Ḃ¹_{d,1}}` and `‖u₀‖_{Ḃ^{2-α}_{d,1}}`.
    Random {
        seed: u64,
        m_max: usize,
        #[serde(default = "default_decay")]
        decay: f64,
        sigma_norm: f64,
        u_norm: f64,
        /// Shift `u₀` by a constant so that `∫ρ₀u₀ = 0`; the velocity then
        /// relaxes to zero instead of to the mean momentum.
        #[serde(default = "yes")]
        zero_momentum: bool,
    },
    Snapshot {
        sigma: PathBuf,
        u: Vec<PathBuf>,
    },
}

fn yes() -> bool {
    true
}

fn default_decay() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Steps between diagnostic records.
    #[serde(default = "one")]
    pub record_every: usize,
    /// Steps between retained snapshots; 0 keeps only the final state.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn one() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            record_every: 1,
            snapshot_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub alignment: AlignmentConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub gates: GateConfig,
    pub initial: InitialData,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        AlignmentParams::new(self.grid.d, self.alignment.alpha)?;
        let t = &self.time;
        if !(t.t_final >= t.t_start) || !t.t_final.is_finite() {
            return Err(Error::config(format!(
                "t_final = {} must be finite and not before t_start = {}",
                t.t_final, t.t_start
            )));
        }
        if !(t.dt > 0.0) {
            return Err(Error::config(format!("dt must be positive, got {}", t.dt)));
        }
        if !matches!(t.duhamel_rule, 1 | 2) {
            return Err(Error::config("duhamel_rule must be 1 or 2"));
        }
        if !matches!(t.rk_order, 2..=4) {
            return Err(Error::config("rk_order must be 2, 3 or 4"));
        }
        if !(self.gates.epsilon > 0.0 && self.gates.eta > 0.0) {
            return Err(Error::config("epsilon and eta gates must be positive"));
        }
        if self.output.record_every == 0 {
            return Err(Error::config("record_every must be at least 1"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<AlignmentParams> {
        AlignmentParams::new(self.grid.d, self.alignment.alpha)
    }

    pub fn make_grid(&self) -> Result<Arc<Grid>> {
        make_grid(self.grid.d, self.grid.n, self.grid.length)
    }

    /// Number of steps from `t_start` to `t_final`; the horizon must be a multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let span = self.time.t_final - self.time.t_start;
        let steps = (span / self.time.dt).round();
        if (steps * self.time.dt - span).abs() > 1e-9 * span.max(self.time.dt) {
            return Err(Error::config(format!(
                "time span {span} is not a multiple of dt = {}",
                self.time.dt
            )));
        }
        Ok(steps as usize)
    }

    /// Builds `(σ₀, u₀)` on `grid`.
    pub fn initial_fields(
        &self,
        grid: &Arc<Grid>,
        decomposition: &DyadicDecomposition,
    ) -> Result<(ScalarField, VectorField)> {
        let d = grid.dim();
        match &self.initial {
            InitialData::Modes { sigma, u } => {
                let mut s = ScalarField::zeros(grid);
                for m in sigma {
                    s = s.add(&mode_field(grid, m)?);
                }
                let mut comps: Vec<ScalarField> = (0..d).map(|_| ScalarField::zeros(grid)).collect();
                for m in u {
                    if m.component >= d {
                        return Err(Error::config(format!(
                            "velocity mode targets component {} on a {d}-dimensional grid",
                            m.component
                        )));
                    }
                    comps[m.component] = comps[m.component].add(&mode_field(grid, m)?);
                }
                Ok((s, VectorField::new(comps)?))
            }
            InitialData::Random {
                seed,
                m_max,
                decay,
                sigma_norm,
                u_norm,
                zero_momentum,
            } => {
                let alpha = self.alignment.alpha;
                let s = band_limited_field(grid, &mut stream_rng(*seed, 0), *m_max, *decay)?;
                let u = band_limited_vector(grid, &mut stream_rng(*seed, 1), *m_max, *decay)?;
                let s_now = decomposition.besov_norm(&s, BesovSpec::critical(1.0, d));
                let refs: Vec<&ScalarField> = u.components().iter().collect();
                let u_now = decomposition.besov_norm_multi(&refs, BesovSpec::critical(2.0 - alpha, d));
                let s = s.scale(sigma_norm / s_now);
                let mut u = u.scale(u_norm / u_now);
                if *zero_momentum {
                    let rho = s.map(|v| 1.0 + v);
                    let mass = rho.mean();
                    u = u.map_components(|c| {
                        let shift = rho.mul_raw(c).mean() / mass;
                        c.map(|v| v - shift)
                    });
                }
                Ok((s, u))
            }
            InitialData::Snapshot { sigma, u } => {
                if u.len() != d {
                    return Err(Error::config(format!(
                        "{} velocity snapshots given for a {d}-dimensional grid",
                        u.len()
                    )));
                }
                let s = snapshot::read(sigma, Some(grid))?.field;
                let comps = u
                    .iter()
                    .map(|p| snapshot::read(p, Some(grid)).map(|snap| snap.field))
                    .collect::<Result<Vec<_>>>()?;
                Ok((s, VectorField::new(comps)?))
            }
        }
    }
}

fn mode_field(grid: &Arc<Grid>, m: &ModeSpec) -> Result<ScalarField> {
    let d = grid.dim();
    if m.m.len() != d {
        return Err(Error::config(format!(
            "mode {:?} has {} entries on a {d}-dimensional grid",
            m.m,
            m.m.len()
        )));
    }
    let limit = (grid.n() / 3) as i64;
    if m.m.iter().any(|c| c.abs() > limit) {
        return Err(Error::config(format!(
            "mode {:?} exceeds the dealiased range |m| <= {limit}",
            m.m
        )));
    }
    let k = grid.k_unit();
    let mv = [m.m[0] as f64, m.m.get(1).copied().unwrap_or(0) as f64];
    Ok(ScalarField::from_fn(grid, |x| {
        m.amplitude * (k * (mv[0] * x[0] + mv[1] * x[1]) + m.phase).cos()
    }))
}
