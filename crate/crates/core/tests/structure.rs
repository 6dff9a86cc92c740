use fsi_heat_core::structure::{project_modes, shell_energy, ssp_advance, synthesize, verify_ssp_energy, ShellParams, ShellState};
use proptest::prelude::*;
use std::f64::consts::TAU;

const N: usize = 128;

fn nodes(f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..N).map(|j| f(j as f64 / N as f64)).collect()
}

fn state(a: [f64; 3], b: [f64; 3], c: [f64; 2], modes: usize) -> ShellState {
    ShellState::from_nodes(
        &nodes(|y| a[0] * (TAU * y).cos() + a[1] * (TAU * 2.0 * y).sin() + a[2] * (TAU * 5.0 * y).cos()),
        &nodes(|y| b[0] + b[1] * (TAU * 3.0 * y).cos() + b[2] * (TAU * 7.0 * y).sin()),
        &nodes(|y| 0.5 + c[0] * (TAU * y).sin() + c[1] * (TAU * 4.0 * y).cos()),
        modes,
    )
}

/// Without penalties the midpoint rule reproduces the energy equality.
#[test]
fn energy_equality_without_penalties() {
    let p = ShellParams { delta: 0.0, alpha2: 0.05, ..Default::default() };
    let mut s = state([0.05, -0.02, 0.01], [0.1, 0.3, -0.2], [0.1, -0.05], p.modes);
    let e0 = shell_energy(&s, &p).total();
    let zero = vec![0.0; N];
    for _ in 0..16 {
        let before = shell_energy(&s, &p);
        let step = ssp_advance(&s, &zero, &zero, &p).unwrap();
        let after = shell_energy(&step.state, &p);
        assert_eq!(step.report.penalties(), 0.0);
        let gap = verify_ssp_energy(&before, &after, &step.report);
        assert!(gap.abs() <= 1e-9 * e0, "|ΔE + D| = {gap:e}");
        s = step.state;
    }
}

#[test]
fn stiffness_scales_only_bending_energy() {
    let p = ShellParams { stiffness: 4.0, ..Default::default() };
    let s = state([0.05, 0.0, 0.0], [0.0; 3], [0.0; 2], p.modes);
    let e = shell_energy(&s, &p);
    let e1 = shell_energy(&s, &ShellParams::default());
    assert!((e.bending - 4.0 * e1.bending).abs() < 1e-15);
    assert_eq!(e.kinetic, e1.kinetic);
}

#[test]
fn single_mode_round_trip_oracle() {
    let c = project_modes(&nodes(|y| 0.3 * (TAU * 4.0 * y).sin()), 8);
    assert!(c[4].re.abs() < 1e-15);
    assert!((c[4].im + 0.15).abs() < 1e-15);
    let back = synthesize(&c, N);
    assert!((back[3] - 0.3 * (TAU * 12.0 / N as f64).sin()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// With penalties and arbitrary lagged data the window balance never creates energy.
    #[test]
    fn penalised_window_is_dissipative(
        a in proptest::array::uniform3(-0.05f64..0.05),
        b in proptest::array::uniform3(-0.5f64..0.5),
        c in proptest::array::uniform2(-0.2f64..0.2),
        g in -0.5f64..0.5,
        delta in 0.0f64..0.5,
    ) {
        let p = ShellParams { delta, ..Default::default() };
        let s = state(a, b, c, p.modes);
        let lag_v = nodes(|y| g * (TAU * 2.0 * y).cos());
        let lag_t = nodes(|y| 0.5 + 0.1 * g * (TAU * y).sin());
        let before = shell_energy(&s, &p);
        let step = ssp_advance(&s, &lag_v, &lag_t, &p).unwrap();
        let after = shell_energy(&step.state, &p);
        let slack = verify_ssp_energy(&before, &after, &step.report);
        let scale = before.total() + step.report.inputs();
        prop_assert!(slack >= -1e-12 * scale.max(1e-30), "slack {slack:e}");
        prop_assert!(step.report.dissipation() >= 0.0);
    }

    #[test]
    fn projection_preserves_real_band_limited_fields(a in -1.0f64..1.0, b in -1.0f64..1.0, m in 1usize..16) {
        let f = nodes(|y| a + b * (TAU * m as f64 * y).cos());
        let back = synthesize(&project_modes(&f, 32), N);
        for (x, y) in back.iter().zip(&f) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }
}
