use fsi_heat_core::constitutive::{
    entropy_production, gibbs_relative_residual, log_grid, validate_hypotheses, GIBBS_STEP, GIBBS_TOL,
};
use fsi_heat_core::{GasModel, TransportModel};
use proptest::prelude::*;

#[test]
fn default_law_passes_hypotheses_on_log_grid() {
    let grid = log_grid(1e-3, 1e3, 20);
    let report = validate_hypotheses(&GasModel::default(), &TransportModel::default(), &grid, &grid);
    assert!(report.all_pass(), "{report}");
    let gibbs = report.get("gibbs").unwrap();
    assert!(gibbs.passed && gibbs.margin > 0.0);
}

#[test]
fn log_grid_endpoints_and_ratio() {
    let g = log_grid(1e-2, 1e2, 5);
    assert_eq!(g.len(), 5);
    assert!((g[0] - 1e-2).abs() < 1e-17);
    assert!((g[4] - 1e2).abs() < 1e-12);
    for w in g.windows(2) {
        assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
    }
}

#[test]
fn closed_forms_at_a_reference_state() {
    // c1 = c2 = cv = a = 1, gamma = 5/3 at rho = 8, theta = 2.
    let g = GasModel::default();
    let p = 8f64.powf(5.0 / 3.0) + 16.0 + 16.0 / 3.0;
    assert!((g.pressure(8.0, 2.0).unwrap() - p).abs() < 1e-12 * p);
    let rho_e = 1.5 * 32.0 + 16.0 + 16.0;
    assert!((g.rho_e(8.0, 2.0).unwrap() - rho_e).abs() < 1e-12 * rho_e);
    let s = 2f64.ln() - 8f64.ln() + 4.0 * 8.0 / 24.0;
    assert!((g.entropy(8.0, 2.0).unwrap() - s).abs() < 1e-14);
}

#[test]
fn entropy_needs_positive_state() {
    let g = GasModel::default();
    assert!(g.entropy(0.0, 1.0).is_err());
    assert!(g.entropy(1.0, 0.0).is_err());
    assert_eq!(g.rho_s(0.0, 0.5).unwrap(), 4.0 / 3.0 * 0.125);
    assert!(g.internal_energy(0.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gibbs_relation_holds(lr in -3.0f64..3.0, lt in -3.0f64..3.0) {
        let g = GasModel::default();
        let r = gibbs_relative_residual(&g, 10f64.powf(lr), 10f64.powf(lt), GIBBS_STEP);
        prop_assert!(r <= GIBBS_TOL, "residual {r}");
    }

    #[test]
    fn temperature_inverts_internal_energy(lr in -4.0f64..3.0, lt in -3.0f64..2.0, chi in 0.0f64..=1.0) {
        let g = GasModel::default();
        let (rho, theta) = (10f64.powf(lr), 10f64.powf(lt));
        let e = g.rho_e_molecular(rho, theta) + chi * g.a * theta.powi(4);
        let (t, clamped) = g.temperature_from_energy(rho, e, chi, 1e-12, 1.0);
        prop_assert!(!clamped);
        prop_assert!((t - theta).abs() <= 1e-9 * theta, "{t} vs {theta}");
    }

    #[test]
    fn pressure_is_increasing_in_density(lr in -3.0f64..3.0, lt in -3.0f64..3.0) {
        let g = GasModel::default();
        let (rho, theta) = (10f64.powf(lr), 10f64.powf(lt));
        prop_assert!(g.dp_drho(rho, theta) > 0.0);
        prop_assert!(g.pressure(rho, theta).unwrap() > 0.0);
        prop_assert!(g.heat_capacity(rho, theta, 1.0) > 0.0);
    }

    #[test]
    fn entropy_production_is_non_negative(
        theta in 1e-3f64..1e2,
        g in proptest::array::uniform4(-10.0f64..10.0),
        q in proptest::array::uniform2(-10.0f64..10.0),
    ) {
        let t = TransportModel::default();
        let s = entropy_production(&t, theta, [[g[0], g[1]], [g[2], g[3]]], q).unwrap();
        prop_assert!(s >= 0.0);
    }
}
