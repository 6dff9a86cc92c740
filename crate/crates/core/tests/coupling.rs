use fsi_heat_core::config::config_with;
use fsi_heat_core::coupling::{continuation_study, time_shift, Sweep, TraceHistory};
use fsi_heat_core::extension::build_coefficient_fields;
use fsi_heat_core::fluid::{FluidSolver, FspInput, InterfaceStencil};
use fsi_heat_core::geometry::DisplacementSample;
use fsi_heat_core::{run_splitting, Error, StopReason};

fn history() -> TraceHistory {
    let mut h = TraceHistory::default();
    for n in 0..5 {
        let t = n as f64 * 0.25;
        h.push(t, vec![t, 2.0 * t + 1.0]);
    }
    h
}

#[test]
fn time_shift_rejects_negative_time() {
    assert!(matches!(time_shift(&history(), -1e-3, 0.25), Err(Error::Domain(_))));
}

#[test]
fn time_shift_returns_initial_value_on_first_window() {
    assert_eq!(time_shift(&history(), 0.125, 0.25).unwrap(), vec![0.0, 1.0]);
    assert_eq!(time_shift(&history(), 0.0, 0.25).unwrap(), vec![0.0, 1.0]);
}

#[test]
fn time_shift_delays_by_one_window() {
    let v = time_shift(&history(), 0.875, 0.25).unwrap();
    assert!((v[0] - 0.625).abs() < 1e-15);
    assert!((v[1] - 2.25).abs() < 1e-15);
}

#[test]
fn empty_sweep_gives_empty_report() {
    let p = config_with(&[("run.windows", "1")]).unwrap().problem().unwrap();
    let rep = continuation_study(&p, &Sweep::K(vec![]), None).unwrap();
    assert!(rep.rows.is_empty());
    assert!(rep.successive_differences.is_empty());
}

#[test]
fn increasing_sweep_is_rejected() {
    let p = config_with(&[("run.windows", "1")]).unwrap().problem().unwrap();
    assert!(matches!(continuation_study(&p, &Sweep::K(vec![0.25, 0.5]), None), Err(Error::Validation(_))));
}

#[test]
fn ledger_total_is_non_increasing() {
    let p = config_with(&[("run.windows", "6"), ("grid.n", "48")]).unwrap().problem().unwrap();
    let out = run_splitting(&p).unwrap();
    assert_eq!(out.stop, StopReason::Completed);
    let e0 = out.ledger.rows[0].e0;
    let mut prev = e0;
    for r in &out.ledger.rows {
        assert!(r.lhs_total <= prev + 1e-8 * e0, "window {}: {} > {}", r.window, r.lhs_total, prev);
        prev = r.lhs_total;
    }
    assert!(out.ledger.check(1e-8).passed());
}

/// A very stiff shell at rest behaves like a fixed wall: the coupled run must match a
/// fluid-only run on the undeformed disk with the shell data held at rest.
#[test]
fn rigid_shell_matches_fixed_disk() {
    let cfg = config_with(&[
        ("shell.stiffness", "1e6"),
        ("shell.thermal_coupling", "false"),
        ("initial.w_amplitude", "0"),
        ("initial.v_amplitude", "0"),
        ("approx.dt", "0.025"),
        ("run.windows", "4"),
    ])
    .unwrap();
    let p = cfg.problem().unwrap();
    let coupled = run_splitting(&p).unwrap();
    assert_eq!(coupled.stop, StopReason::Completed);

    let n_gamma = p.geometry.n_gamma;
    let w0 = DisplacementSample::constant(n_gamma, 0.0);
    let coeffs = build_coefficient_fields(&p.geometry, &w0, &p.model.approx, &p.grid, p.coupling.band_cells).unwrap();
    let stencil = InterfaceStencil::build(&p.geometry, &w0, &p.grid, p.fluid.kernel_radius).unwrap();
    let solver = FluidSolver::new(p.grid, p.model, p.fluid).unwrap();
    let shell_v = vec![0.0; n_gamma];
    let shell_theta = p.initial_shell.theta_nodes(n_gamma);
    let mut fluid = p.initial_fluid.clone();
    for n in 0..p.windows {
        let input = FspInput {
            coeffs: &coeffs,
            stencil: &stencil,
            shell_v: &shell_v,
            shell_theta: &shell_theta,
            time: n as f64 * p.model.approx.dt,
            duration: None,
            source: None,
        };
        fluid = solver.advance(&fluid, &input).unwrap().state;
    }

    let a = &coupled.final_state.fluid;
    let interior = &coeffs.interior;
    let rel = |x: &[f64], y: &[f64]| {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..x.len() {
            if interior[k] {
                num += (x[k] - y[k]).powi(2);
                den += y[k].powi(2);
            }
        }
        (num / den.max(1e-300)).sqrt()
    };
    assert!((coupled.final_state.time - 0.1).abs() < 1e-12);
    for (name, x, y) in [
        ("rho", &a.rho, &fluid.rho),
        ("theta", &a.theta, &fluid.theta),
        ("mx", &a.mx, &fluid.mx),
        ("my", &a.my, &fluid.my),
    ] {
        let e = rel(x, y);
        assert!(e <= 0.02, "{name}: relative L2 difference {e:.3e}");
    }
}
