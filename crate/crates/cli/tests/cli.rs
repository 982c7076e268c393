use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[grid]
n = 32
[alignment]
alpha = 1.5
[time]
t_final = 0.2
dt = 0.01
[initial]
kind = "random"
seed = 3
m_max = 5
sigma_norm = 5e-3
u_norm = 5e-3
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracalign"))
        .args(args)
        .env("FRFL_THREADS", "2")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,kinetic,dissipation,residual,linf_u,crit_sigma,crit_u,high_sigma,high_u,mean_sigma\n"));
    assert_eq!(csv.lines().count(), 22);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exit_status"], 0);
    assert_eq!(summary["config"]["grid"]["n"], 32);
    assert_eq!(summary["results"]["gates"]["global_pass"], true);
}

#[test]
fn alpha_outside_range_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("alpha = 1.5", "alpha = 2.5"));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(1, 2)"));
    assert!(!out.join("summary.json").exists());
}

#[test]
fn override_wins_over_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = run(&[
        "simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "alignment.alpha=2.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "time.t_final=0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn nonempty_output_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("stale"), "x").unwrap();
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--force"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn strict_gates_stop_large_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("u_norm = 5e-3", "u_norm = 0.5"));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--strict-gates"]);
    assert_eq!(o.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exit_status"], 1);
    assert_eq!(summary["results"]["ran"], false);
}

#[test]
fn cfl_abort_exits_one_with_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("u_norm = 5e-3", "u_norm = 50.0").replace("dt = 0.01", "dt = 0.1").replace("t_final = 0.2", "t_final = 1.0");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exit_status"], 1);
    assert!(summary["results"]["abort"].is_object());
}

#[test]
fn verify_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = |p: &Path| {
        vec![
            "verify".to_string(),
            "--seed".into(),
            "7".into(),
            "--samples".into(),
            "10".into(),
            "--ladder".into(),
            "64,128".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let o = run(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_fracalign"))
        .args(args(&b))
        .env("FRFL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(a.join("harness.csv")).unwrap(), fs::read(b.join("harness.csv")).unwrap());
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
}

#[test]
fn iterate_particles_and_scaling_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("it");
    let o = run(&["iterate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "scheme.n_max=4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(out.join("iterates.csv")).unwrap().starts_with("n,"));

    let out = tmp.path().join("sc");
    let o = run(&["scaling-check", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["results"]["mismatch"].as_f64().unwrap() < 1e-6);

    let pcfg = tmp.path().join("p.toml");
    fs::write(
        &pcfg,
        "[particles]\nalpha = 1.5\nn_particles = 16\nseed = 1\ndt = 1e-3\nsteps = 20\n[particles.deposit]\nn = 64\n",
    )
    .unwrap();
    let out = tmp.path().join("p");
    let o = run(&["particles", "--config", pcfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("particles.csv")).unwrap();
    assert!(csv.starts_with("t,diameter,fluctuation,momentum_x,momentum_y\n"));
    assert_eq!(csv.lines().count(), 22);
    let rho = out.join("deposits").join("final_rho.frfl");
    let o = run(&["besov-norm", rho.to_str().unwrap(), "--s", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!(v.is_finite() && v > 0.0);
}
