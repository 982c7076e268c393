use fracalign::diagnostics::{embedding_constant, flocking_report, write_diagnostics_csv};
use fracalign::euler::{simulate, RunConfig};
use fracalign::littlewood_paley::build_cutoffs;

fn config(d: usize, n: usize) -> RunConfig {
    RunConfig::from_toml(&format!(
        r#"
[grid]
d = {d}
n = {n}
[alignment]
alpha = 1.4
[time]
t_final = 1.0
dt = 0.005
[initial]
kind = "random"
seed = 91
m_max = 5
sigma_norm = 5e-2
u_norm = 5e-2
[output]
snapshot_every = 20
"#
    ))
    .unwrap()
}

fn worst_residual(cfg: &RunConfig) -> f64 {
    let traj = simulate(cfg).unwrap();
    assert!(traj.abort.is_none());
    let recs = &traj.records;
    assert!(recs.windows(2).all(|w| w[1].kinetic <= w[0].kinetic));
    recs[1..recs.len() - 1]
        .iter()
        .map(|r| r.residual.abs() / r.dissipation)
        .fold(0.0, f64::max)
}

#[test]
fn energy_balance_residual_is_second_order_in_one_and_two_dimensions() {
    // interior residuals use centered differences, so halving dt should quarter them
    for (d, n) in [(1, 64), (2, 32)] {
        let mut cfg = config(d, n);
        let coarse = worst_residual(&cfg);
        cfg.time.dt /= 2.0;
        cfg.output.snapshot_every *= 2;
        let fine = worst_residual(&cfg);
        let order = (coarse / fine).log2();
        assert!(coarse < 5e-2 && order > 1.8, "d = {d}: residuals {coarse:e} -> {fine:e}");
    }
}

#[test]
fn embedding_constant_is_stable_along_a_run() {
    let cfg = config(1, 64);
    let traj = simulate(&cfg).unwrap();
    let grid = cfg.make_grid().unwrap();
    let dec = build_cutoffs(&grid).unwrap();
    let c = embedding_constant(&traj.snapshots, &dec);
    let c0 = embedding_constant(&traj.snapshots[..1], &dec);
    assert!(c.is_finite() && c > 0.0);
    assert!(c <= 2.0 * c0, "{c} vs initial {c0}");
}

#[test]
fn records_round_trip_through_csv() {
    let traj = simulate(&config(1, 32)).unwrap();
    let mut buf = Vec::new();
    write_diagnostics_csv(&mut buf, &traj.records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), traj.records.len() + 1);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last, traj.records.last().unwrap().row().to_vec());
    let f = flocking_report(&traj.records, 0.1).unwrap();
    assert!(f.last < f.initial);
}
