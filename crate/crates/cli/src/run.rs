//! Subcommand bodies. Each returns the process exit status or a [`CliError`].

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use fracalign::diagnostics::{
    cauchy_monitor, flocking_report, inequality_harness, scaling_check, write_diagnostics_csv,
    write_iterate_csv, HarnessConfig, DEFAULT_DECAY_FRACTION,
};
use fracalign::euler::{iterate_from, simulate_from, smallness_gates, RunConfig, SolverState};
use fracalign::littlewood_paley::{build_cutoffs, BesovSpec};
use fracalign::particles::{deposit_fields, run_particles, write_particle_csv, ParticleEnsemble, ParticleRunConfig};
use fracalign::spectral::{make_grid, snapshot};
use fracalign::Error;
use serde_json::{json, Value};
use toml::Table;

use crate::overrides;
use crate::Common;

#[derive(Debug)]
pub struct CliError {
    status: u8,
    msg: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError { status: 2, msg: msg.into() }
    }

    pub fn status(&self) -> u8 {
        self.status
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) | Error::Cfl { .. } => 1,
            _ => 2,
        };
        CliError { status, msg: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("I/O error: {e}"))
    }
}

type Outcome = Result<u8, CliError>;

pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("FRFL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("FRFL_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("FRFL_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load_document(common: &Common) -> Result<Table, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config is required for this subcommand"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut doc: Table = text
        .parse()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    for o in &common.overrides {
        overrides::apply(&mut doc, o).map_err(CliError::config)?;
    }
    Ok(doc)
}

fn load_run_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut doc = load_document(common)?;
    if let Some(seed) = common.seed {
        if let Some(init) = doc.get_mut("initial").and_then(|v| v.as_table_mut()) {
            if init.get("kind").and_then(|k| k.as_str()) == Some("random") {
                init.insert("seed".into(), toml::Value::Integer(seed as i64));
            }
        }
    }
    let text = toml::to_string(&doc).map_err(|e| CliError::config(e.to_string()))?;
    Ok(RunConfig::from_toml(&text)?)
}

fn prepare_out(common: &Common) -> Result<PathBuf, CliError> {
    let out = common
        .out
        .clone()
        .ok_or_else(|| CliError::config("--out is required for this subcommand"))?;
    if out.exists() {
        if !out.is_dir() {
            return Err(CliError::config(format!("{} is not a directory", out.display())));
        }
        if fs::read_dir(&out)?.next().is_some() && !common.force {
            return Err(CliError::config(format!(
                "output directory {} is not empty; pass --force to reuse it",
                out.display()
            )));
        }
    }
    fs::create_dir_all(&out)?;
    Ok(out)
}

fn write_summary(out: &Path, summary: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| CliError::config(e.to_string()))?;
    fs::write(out.join("summary.json"), text + "\n")?;
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Writes the summary for statuses 0 and 1; a domain error becomes status 1
/// with its message recorded.
fn finish(out: &Path, mut summary: Value, body: Result<(u8, Value), CliError>) -> Outcome {
    let (status, results, err) = match body {
        Ok((s, r)) => (s, r, None),
        Err(e) if e.status == 1 => (1, Value::Null, Some(e)),
        Err(e) => return Err(e),
    };
    summary["exit_status"] = json!(status);
    summary["results"] = results;
    if let Some(e) = &err {
        summary["error"] = json!(e.msg);
    }
    write_summary(out, &summary)?;
    match err {
        Some(e) => Err(e),
        None => Ok(status),
    }
}

pub fn simulate(common: &Common) -> Outcome {
    let cfg = load_run_config(common)?;
    let out = prepare_out(common)?;
    let base = json!({ "subcommand": "simulate", "config": to_json(&cfg) });
    let body = (|| -> Result<(u8, Value), CliError> {
        let grid = cfg.make_grid()?;
        let dec = build_cutoffs(&grid)?;
        let (sigma, u) = cfg.initial_fields(&grid, &dec)?;
        let alpha = cfg.alignment.alpha;
        let gates = smallness_gates(&sigma, &u, cfg.gates.epsilon, cfg.gates.eta, alpha, &dec);
        if common.strict_gates && !gates.global_pass {
            eprintln!(
                "smallness gates fail: |u0| = {:.3e} (epsilon {:.1e}), |sigma0| = {:.3e} (eta {:.1e})",
                gates.u_norm, gates.epsilon, gates.sigma_norm, gates.eta
            );
            return Ok((1, json!({ "gates": to_json(&gates), "ran": false })));
        }
        if !gates.global_pass {
            log::warn!("initial data exceed the smallness gates; running anyway");
        }
        let state = SolverState::new(cfg.time.t_start, sigma, u, cfg.params()?)?;
        let traj = simulate_from(state, &cfg, &dec)?;
        write_diagnostics_csv(BufWriter::new(File::create(out.join("diagnostics.csv"))?), &traj.records)?;
        if cfg.output.snapshot_every > 0 {
            let dir = out.join("snapshots");
            fs::create_dir_all(&dir)?;
            for (k, st) in traj.snapshots.iter().enumerate() {
                snapshot::write(&dir.join(format!("{k:05}_sigma.frfl")), &st.sigma, "sigma")?;
                for (c, comp) in st.u.components().iter().enumerate() {
                    snapshot::write(&dir.join(format!("{k:05}_u{c}.frfl")), comp, &format!("u{c}"))?;
                }
            }
        }
        let flocking = flocking_report(&traj.records, DEFAULT_DECAY_FRACTION).ok();
        let status = if let Some(a) = &traj.abort {
            eprintln!("run aborted at t = {}: {}", a.t, a.reason);
            1
        } else {
            0
        };
        Ok((
            status,
            json!({
                "gates": to_json(&gates),
                "ran": true,
                "steps_taken": traj.steps_taken,
                "final_t": traj.final_state.t,
                "abort": to_json(&traj.abort),
                "flocking": flocking.map(|f| json!({
                    "initial": f.initial,
                    "last": f.last,
                    "decay_fraction": f.decay_fraction,
                    "decayed": f.decayed,
                })),
            }),
        ))
    })();
    finish(&out, base, body)
}

pub fn iterate(common: &Common) -> Outcome {
    let cfg = load_run_config(common)?;
    let out = prepare_out(common)?;
    let base = json!({ "subcommand": "iterate", "config": to_json(&cfg) });
    let body = (|| -> Result<(u8, Value), CliError> {
        let grid = cfg.make_grid()?;
        let dec = build_cutoffs(&grid)?;
        let (sigma, u) = cfg.initial_fields(&grid, &dec)?;
        let gates = smallness_gates(&sigma, &u, cfg.gates.epsilon, cfg.gates.eta, cfg.alignment.alpha, &dec);
        if common.strict_gates && !gates.global_pass {
            eprintln!("smallness gates fail; not iterating");
            return Ok((1, json!({ "gates": to_json(&gates), "ran": false })));
        }
        let outcome = iterate_from(&sigma, &u, &cfg, &dec)?;
        write_iterate_csv(BufWriter::new(File::create(out.join("iterates.csv"))?), &outcome.records)?;
        let contraction = cauchy_monitor(&outcome.records).ok();
        Ok((
            0,
            json!({
                "gates": to_json(&gates),
                "ran": true,
                "iterations": outcome.records.len(),
                "converged": outcome.converged,
                "diverged": outcome.diverged,
                "contraction": to_json(&contraction),
            }),
        ))
    })();
    finish(&out, base, body)
}

pub fn particles(common: &Common) -> Outcome {
    let mut doc = load_document(common)?;
    let section = doc
        .remove("particles")
        .ok_or_else(|| CliError::config("configuration has no [particles] section"))?;
    let mut cfg: ParticleRunConfig = section
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config(format!("[particles]: {e}")))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let params = cfg.params()?;
    let out = prepare_out(common)?;
    let base = json!({ "subcommand": "particles", "config": to_json(&cfg) });
    let body = (|| -> Result<(u8, Value), CliError> {
        let e0 = ParticleEnsemble::random(cfg.n_particles, &params, cfg.v_scale, cfg.seed)?;
        let (last, records) = run_particles(&e0, cfg.dt, cfg.steps, cfg.record_every, &params)?;
        write_particle_csv(BufWriter::new(File::create(out.join("particles.csv"))?), &records)?;
        if let Some(dep) = &cfg.deposit {
            let grid = make_grid(cfg.d, dep.n, cfg.length)?;
            let width = dep.kernel_width.unwrap_or(2.0 * grid.spacing());
            let dir = out.join("deposits");
            fs::create_dir_all(&dir)?;
            for (tag, e) in [("initial", &e0), ("final", &last)] {
                let (rho, u) = deposit_fields(e, &grid, width, dep.rho_floor)?;
                snapshot::write(&dir.join(format!("{tag}_rho.frfl")), &rho, "rho")?;
                for (c, comp) in u.components().iter().enumerate() {
                    snapshot::write(&dir.join(format!("{tag}_u{c}.frfl")), comp, &format!("u{c}"))?;
                }
            }
        }
        let first = records[0];
        let end = records[records.len() - 1];
        Ok((
            0,
            json!({
                "delta_reg": params.delta_reg,
                "initial_diameter": first.diameter,
                "final_diameter": end.diameter,
                "initial_fluctuation": first.fluctuation,
                "final_fluctuation": end.fluctuation,
            }),
        ))
    })();
    finish(&out, base, body)
}

pub fn verify(common: &Common, samples: usize, alpha: f64, dim: usize, ladder: Vec<usize>) -> Outcome {
    let cfg = HarnessConfig::new(common.seed.unwrap_or(7), samples, dim, alpha, ladder);
    // validate before touching the output directory
    fracalign::nonlocal::AlignmentParams::new(dim, alpha)?;
    let out = prepare_out(common)?;
    let base = json!({ "subcommand": "verify", "config": to_json(&cfg) });
    let body = (|| -> Result<(u8, Value), CliError> {
        let reports = inequality_harness(&cfg)?;
        let mut csv = String::from("id,n,constant\n");
        for r in &reports {
            for (n, c) in &r.per_resolution {
                csv.push_str(&format!("{},{n},{c:e}\n", r.id));
            }
        }
        fs::write(out.join("harness.csv"), csv)?;
        for r in &reports {
            println!(
                "{:<28} C = {:.4e}  growth {:+.2}%{}",
                r.id,
                r.constant,
                100.0 * r.max_growth(),
                if r.unstable { "  UNSTABLE" } else { "" }
            );
        }
        Ok((0, json!({ "inequalities": to_json(&reports) })))
    })();
    finish(&out, base, body)
}

pub fn besov_norm(common: &Common, path: &Path, s: f64, p: Option<f64>, q: f64) -> Outcome {
    let snap = snapshot::read(path, None)?;
    let grid = snap.field.grid().clone();
    let spec = BesovSpec::new(s, p.unwrap_or(grid.dim() as f64), q)?;
    let dec = build_cutoffs(&grid)?;
    let norm = dec.besov_norm(&snap.field, spec);
    println!("{norm:e}");
    if common.out.is_some() {
        let out = prepare_out(common)?;
        let base = json!({
            "subcommand": "besov-norm",
            "config": { "snapshot": path, "s": s, "p": spec.p, "q": q },
        });
        return finish(&out, base, Ok((0, json!({ "name": snap.name, "norm": norm }))));
    }
    Ok(0)
}

pub fn scaling(common: &Common, lambda: f64) -> Outcome {
    let cfg = load_run_config(common)?;
    let out = prepare_out(common)?;
    let base = json!({ "subcommand": "scaling-check", "config": to_json(&cfg), "lambda": lambda });
    let body = scaling_check(&cfg, lambda)
        .map(|r| {
            println!("lambda = {lambda}: mismatch {:e} over {} times", r.mismatch, r.compared_times);
            (0, to_json(&r))
        })
        .map_err(CliError::from);
    finish(&out, base, body)
}
