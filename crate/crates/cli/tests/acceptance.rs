//! End-to-end acceptance criteria at desk scale (64² grid, 32 modes, T ≤ 0.5). Every
//! criterion prints one PASS/FAIL line; the test fails if any criterion fails.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::Instant;

use fsi_heat_core::config::config_with;
use fsi_heat_core::constitutive::{log_grid, validate_hypotheses};
use fsi_heat_core::coupling::{continuation_study, StudyReport, Sweep};
use fsi_heat_core::fluid::InterfaceStencil;
use fsi_heat_core::geometry::{DisplacementSample, ReferenceGeometry};
use fsi_heat_core::io::read_ledger;
use fsi_heat_core::manufactured::{default_resolutions, residual_convergence, ManufacturedCase};
use fsi_heat_core::structure::{shell_energy, ssp_advance, verify_ssp_energy, ShellParams, ShellState};
use fsi_heat_core::{run_splitting, GasModel, Grid, StopReason, TransportModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" > ")
}

fn study(sweep: Sweep) -> StudyReport {
    let p = config_with(&[]).unwrap().problem().unwrap();
    continuation_study(&p, &sweep, None).unwrap()
}

fn prototype_law() -> Verdict {
    let grid = log_grid(1e-3, 1e3, 20);
    let report = validate_hypotheses(&GasModel::default(), &TransportModel::default(), &grid, &grid);
    let gibbs = report.get("gibbs").unwrap();
    verdict(report.all_pass() && gibbs.passed, format!("20x20 log grid, gibbs: {}", gibbs.detail))
}

fn geometry() -> Verdict {
    let g = ReferenceGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let zero = DisplacementSample::constant(g.n_gamma, 0.0);
    let identity = (0..10_000).all(|_| {
        let x = [rng.gen_range(-1.9..1.9), rng.gen_range(-1.9..1.9)];
        g.flow_map(&zero, x).unwrap() == x
    });
    let shifted = DisplacementSample::constant(g.n_gamma, 0.1);
    let area_err = (0..g.n_gamma)
        .map(|j| (g.deformed_normal_and_area(&shifted, (j as f64 + 0.5) / g.n_gamma as f64).unwrap().1 - 1.1).abs())
        .fold(0.0, f64::max);
    let w = DisplacementSample::from_fn(g.n_gamma, |y| 0.15 * (TAU * 2.0 * y).cos() + 0.05 * (TAU * 3.0 * y).sin());
    let (lo, hi) = g.jacobian_bounds(&w);
    let mut outside = 0;
    for _ in 0..10_000 {
        let (r, a) = (rng.gen_range(0.3..1.7), rng.gen_range(0.0..TAU));
        let j = g.jacobian_factor(&w, [r * a.cos(), r * a.sin()]);
        if !(j >= lo && j <= hi) {
            outside += 1;
        }
    }
    verdict(
        identity && area_err <= 1e-6 && outside == 0 && lo > 0.0,
        format!("identity flow map {identity}, |S^w - 1.1| = {area_err:.1e}, {outside}/10000 Jacobians outside [{lo:.3}, {hi:.3}]"),
    )
}

fn shell_energy_equality() -> Verdict {
    let n = 128;
    let p = ShellParams { delta: 0.0, ..Default::default() };
    let nodes = |f: &dyn Fn(f64) -> f64| (0..n).map(|j| f(j as f64 / n as f64)).collect::<Vec<_>>();
    let mut s = ShellState::from_nodes(
        &nodes(&|y| 0.05 * (TAU * 2.0 * y).cos() + 0.01 * (TAU * 7.0 * y).sin()),
        &nodes(&|y| 0.2 * (TAU * 3.0 * y).sin()),
        &nodes(&|y| 0.5 + 0.1 * (TAU * y).cos()),
        p.modes,
    );
    let e0 = shell_energy(&s, &p).total();
    let zero = vec![0.0; n];
    let mut worst = 0.0f64;
    for _ in 0..16 {
        let before = shell_energy(&s, &p);
        let step = ssp_advance(&s, &zero, &zero, &p).unwrap();
        worst = worst.max(verify_ssp_energy(&before, &shell_energy(&step.state, &p), &step.report).abs());
        s = step.state;
    }
    verdict(worst <= 1e-9 * e0, format!("max |dE + D| / E0 = {:.2e} over 16 windows", worst / e0))
}

fn mass_and_entropy() -> Verdict {
    let p = config_with(&[]).unwrap().problem().unwrap();
    let out = run_splitting(&p).unwrap();
    let drift = out.fluid_reports.iter().map(|r| r.max_mass_drift).fold(0.0, f64::max);
    let sigma = out.fluid_reports.iter().map(|r| r.min_entropy_integrand).fold(f64::INFINITY, f64::min);
    verdict(
        drift <= 1e-12 && sigma >= 0.0 && out.stop == StopReason::Completed,
        format!("max mass drift {drift:.1e}, min entropy integrand {sigma:.2e} over {} windows", out.fluid_reports.len()),
    )
}

fn randomized_ledgers() -> Verdict {
    let mut worst = f64::INFINITY;
    for seed in 1..=5 {
        let seed = seed.to_string();
        let p = config_with(&[("run.seed", &seed), ("run.perturbation", "0.3")]).unwrap().problem().unwrap();
        let out = run_splitting(&p).unwrap();
        worst = worst.min(out.ledger.min_relative_slack());
    }
    verdict(worst >= -1e-8, format!("min relative slack over 5 seeds {worst:+.2e}"))
}

fn defect_and_exterior(report: &StudyReport) -> (Verdict, Verdict) {
    let defect: Vec<f64> = report.rows.iter().map(|r| r.penalization_defect).collect();
    let ext: Vec<f64> = report.rows.iter().map(|r| r.max_exterior_mass).collect();
    let last = report.rows.last().unwrap();
    let share = last.max_exterior_mass / last.total_mass;
    (
        verdict(report.slope_defect >= 0.7, format!("defect {}, slope {:.3}", fmt(&defect), report.slope_defect)),
        verdict(
            strictly_decreasing(&ext) && share <= 0.05,
            format!("max exterior mass {}, {:.2}% of total at dt = 1/64", fmt(&ext), 100.0 * share),
        ),
    )
}

fn k_limit(report: &StudyReport) -> Verdict {
    let rad: Vec<f64> = report.rows.iter().map(|r| r.radiation_exterior).collect();
    let visc: Vec<f64> = report.rows.iter().map(|r| r.viscous_exterior).collect();
    verdict(
        strictly_decreasing(&rad) && strictly_decreasing(&visc),
        format!("exterior radiation {}, exterior viscous dissipation {}", fmt(&rad), fmt(&visc)),
    )
}

fn delta_limit(report: &StudyReport) -> Verdict {
    let art: Vec<f64> = report.rows.iter().map(|r| r.artificial_energy).collect();
    let d = &report.successive_differences;
    verdict(
        strictly_decreasing(&art) && d.len() == 2 && strictly_decreasing(d),
        format!("artificial energy {}, successive differences {}", fmt(&art), fmt(d)),
    )
}

fn manufactured() -> Verdict {
    let levels = default_resolutions(3);
    let a = residual_convergence(ManufacturedCase::A, &levels).unwrap();
    let b = residual_convergence(ManufacturedCase::B, &levels).unwrap();
    let c = residual_convergence(ManufacturedCase::C, &levels).unwrap();
    let oa = a.order("theta_l2").unwrap();
    let ob = b.order("velocity_l2").unwrap();
    let rc = c.min_ratio("entropy_residual").unwrap().min(c.min_ratio("energy_residual").unwrap());
    verdict(
        oa >= 1.8 && ob >= 0.9 && rc >= 1.8,
        format!("A order {oa:.3}, B order {ob:.3}, C min reduction factor {rc:.2}"),
    )
}

fn interface_operators() -> Verdict {
    let g = ReferenceGeometry::default();
    let grid = Grid::new(64, 2.0);
    let w = DisplacementSample::from_fn(g.n_gamma, |y| 0.1 * (TAU * 2.0 * y).cos());
    let st = InterfaceStencil::build(&g, &w, &grid, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let gam: Vec<f64> = (0..st.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lhs = grid.cell_area() * st.spread(&gam).iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>();
    let rhs = st.gamma_dot(&gam, &st.interpolate(&phi));
    let adjoint = (lhs - rhs).abs() / lhs.abs().max(1.0);
    let affine: Vec<f64> = (0..grid.len()).map(|k| 0.3 - 1.7 * grid.center(k)[0] + 0.9 * grid.center(k)[1]).collect();
    let trace_err = st
        .bilinear_interpolate(&affine)
        .iter()
        .zip(&st.positions)
        .map(|(v, x)| (v - (0.3 - 1.7 * x[0] + 0.9 * x[1])).abs())
        .fold(0.0, f64::max);
    verdict(
        adjoint <= 1e-13 && trace_err <= 1e-12,
        format!("adjointness defect {adjoint:.1e}, affine trace error {trace_err:.1e}"),
    )
}

fn degeneracy_exit() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("drive.txt");
    std::fs::write(&cfg, "initial.v_amplitude = 3\ninitial.w_mode = 0\nrun.windows = 8\n").unwrap();
    let out_dir = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_fsi-heat-sim"))
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    let ledger = read_ledger(&out_dir.join("ledger.csv")).unwrap();
    let stop = std::fs::read_to_string(out_dir.join("stop.txt")).unwrap();
    let stop_window: usize = stop
        .lines()
        .find_map(|l| l.strip_prefix("window "))
        .and_then(|v| v.parse().ok())
        .unwrap_or(usize::MAX);
    let check = ledger.check(1e-8);
    verdict(
        status.code() == Some(2) && check.passed() && ledger.len() == stop_window && stop.starts_with("degenerate"),
        format!(
            "exit code {:?}, stop at window {stop_window}, {} valid ledger rows (worst slack {:+.1e})",
            status.code(),
            ledger.len(),
            check.worst_relative_slack
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |n: u32, name: &'static str, v: Verdict| {
        println!("criterion {n:2} {} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, name, v));
    };
    record(1, "prototype law", prototype_law());
    record(2, "geometry", geometry());
    record(3, "shell energy equality", shell_energy_equality());
    record(4, "mass and entropy production", mass_and_entropy());
    record(5, "randomized ledgers", randomized_ledgers());
    let dt = study(Sweep::Dt(vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]));
    let (defect, exterior) = defect_and_exterior(&dt);
    record(6, "penalization defect rate", defect);
    record(7, "exterior mass", exterior);
    record(8, "k limit", k_limit(&study(Sweep::K(vec![0.5, 0.35, 0.25]))));
    record(9, "delta limit", delta_limit(&study(Sweep::Delta(vec![0.1, 0.05, 0.025]))));
    record(10, "manufactured solutions", manufactured());
    record(11, "interface operators", interface_operators());
    record(12, "degeneracy exit", degeneracy_exit());
    println!("acceptance finished in {:.1?}", started.elapsed());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.passed).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
