use std::fs;
use std::path::Path;

use fsi_heat_core::config::{config_with, parse_config, KEYS};
use fsi_heat_core::io::{
    read_ledger, read_snapshot, write_outputs, write_snapshot, OutputOptions, Snapshot, ENERGY_PLOT_HEADER,
    EXTERIOR_PLOT_HEADER, GAMMA_TRACE_HEADER, INTERFACE_PLOT_HEADER, PENALTY_PLOT_HEADER, SHELL_MODES_HEADER,
};
use fsi_heat_core::{run_splitting, Error, FluidState, Grid};
use proptest::prelude::*;

#[test]
fn empty_config_echoes_every_default() {
    let c = parse_config("").unwrap();
    let echo = c.effective();
    for (key, default, _) in KEYS {
        let line = echo.lines().find(|l| l.starts_with(&format!("{key} = "))).unwrap_or_else(|| panic!("{key} missing"));
        let value = line.split_once(" = ").unwrap().1;
        let same = match (value.parse::<f64>(), default.parse::<f64>()) {
            (Ok(a), Ok(b)) => a == b,
            _ => value == *default,
        };
        assert!(same, "{key}: echoed {value}, default {default}");
    }
}

#[test]
fn extension_parameter_echoes_derived_values() {
    let echo = parse_config("approx.k = 0.5\n").unwrap().effective();
    for (key, value) in [("eta", 1.0 / 256.0), ("omega", 0.25), ("nu", 0.25), ("lambda", 0.5)] {
        let line = echo.lines().find(|l| l.contains(&format!("approx.{key} ="))).unwrap();
        let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert_eq!(v, value, "{key}");
    }
}

#[test]
fn vanishing_shell_damping_is_rejected() {
    let r = parse_config("shell.alpha1 = 0\nshell.alpha2 = 0\n").and_then(|c| c.problem());
    assert!(matches!(r, Err(Error::Validation(_))), "{r:?}");
}

#[test]
fn effective_echo_reparses_to_same_config() {
    let c = parse_config("approx.k = 0.35\ngrid.n = 48\ninitial.w_amplitude = 0.01\n").unwrap();
    let again = parse_config(&c.effective()).unwrap();
    assert_eq!(again.effective(), c.effective());
}

fn csv_lines(dir: &Path, name: &str) -> Vec<String> {
    fs::read_to_string(dir.join(name)).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn zero_window_run_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(&[("run.windows", "0")]).unwrap();
    let out = run_splitting(&cfg.problem().unwrap()).unwrap();
    write_outputs(&out, dir.path(), &OutputOptions { snapshot_every: 1, ..Default::default() }).unwrap();
    for (name, header) in [
        ("shell_modes.csv", SHELL_MODES_HEADER),
        ("gamma_trace.csv", GAMMA_TRACE_HEADER),
        ("plots/energy.csv", ENERGY_PLOT_HEADER),
        ("plots/exterior.csv", EXTERIOR_PLOT_HEADER),
        ("plots/penalties.csv", PENALTY_PLOT_HEADER),
        ("plots/interface.csv", INTERFACE_PLOT_HEADER),
    ] {
        assert_eq!(csv_lines(dir.path(), name), vec![header.to_string()], "{name}");
    }
    assert_eq!(csv_lines(dir.path(), "ledger.csv").len(), 1);
    assert!(!dir.path().join("field_0000.dat").exists());
}

#[test]
fn written_ledger_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(&[("run.windows", "3"), ("grid.n", "32"), ("geometry.n_gamma", "96"), ("shell.modes", "16")]).unwrap();
    let out = run_splitting(&cfg.problem().unwrap()).unwrap();
    write_outputs(&out, dir.path(), &OutputOptions { snapshot_every: 2, ..Default::default() }).unwrap();
    let back = read_ledger(&dir.path().join("ledger.csv")).unwrap();
    assert_eq!(back.rows, out.ledger.rows);
    assert!(back.check(1e-8).passed());
    assert!(dir.path().join("field_0000.dat").exists());
    assert!(dir.path().join("field_0002.dat").exists());
    assert!(!dir.path().join("field_0001.dat").exists());
    let snap = read_snapshot(&dir.path().join("field_0002.dat")).unwrap();
    assert_eq!(snap.rho, out.trajectory.frames[2].fluid.rho);
}

#[test]
fn outputs_are_byte_deterministic() {
    let cfg = config_with(&[("run.windows", "2"), ("grid.n", "32"), ("geometry.n_gamma", "96"), ("shell.modes", "16")]).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = run_splitting(&cfg.problem().unwrap()).unwrap();
        write_outputs(&out, d.path(), &OutputOptions { snapshot_every: 1, ..Default::default() }).unwrap();
    }
    for name in ["ledger.csv", "shell_modes.csv", "gamma_trace.csv", "field_0002.dat", "plots/energy.csv", "plots/interface.csv"] {
        assert_eq!(fs::read(dirs[0].path().join(name)).unwrap(), fs::read(dirs[1].path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn malformed_snapshot_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.dat");
    fs::write(&p, "# fsi-heat-sim field snapshot\nwindow 0\ntime 0.0\nn 2\nhalf_width 1.0\n").unwrap();
    assert!(matches!(read_snapshot(&p), Err(Error::Format { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snapshot_round_trips_bit_identically(seed in proptest::collection::vec(-1e6f64..1e6, 16), t in 0.0f64..10.0) {
        let n = 4;
        let grid = Grid::new(n, 1.5);
        let f = |k: usize| seed.iter().map(|v| v * (k as f64 + 0.1).sqrt() / 7.0).collect::<Vec<_>>();
        let rho: Vec<f64> = f(0).iter().map(|v| v.abs() + f64::MIN_POSITIVE).collect();
        let state = FluidState::new(grid, rho, f(1), f(2), f(3).iter().map(|v| v.abs() + 1e-300).collect());
        let snap = Snapshot::from_state(3, t, &state);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.dat");
        write_snapshot(&path, &snap).unwrap();
        let back = read_snapshot(&path).unwrap();
        prop_assert_eq!(back.time.to_bits(), t.to_bits());
        for (a, b) in back.rho.iter().chain(&back.mx).chain(&back.my).chain(&back.theta)
            .zip(snap.rho.iter().chain(&snap.mx).chain(&snap.my).chain(&snap.theta)) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.to_state().rho, state.rho);
    }
}
