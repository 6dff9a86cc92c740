use fsi_heat_core::config::config_with;
use fsi_heat_core::constitutive::stress_with;
use fsi_heat_core::diagnostics::weak::{build_test_pair, entropy_inequality_residual, BlendLayers, TestField, TrajectoryFields, WeakModel};
use fsi_heat_core::extension::artificial_energy;
use fsi_heat_core::manufactured::{
    breathing_identity_check, default_resolutions, identity_residuals, residual_convergence, BreathingCase, HeatDiffusionCase,
    ManufacturedCase, SwirlCase,
};
use fsi_heat_core::{run_splitting, Error};

const H: f64 = 1e-4;

fn d_dx(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    (f(x + H, y) - f(x - H, y)) / (2.0 * H)
}

fn d_dy(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    (f(x, y + H) - f(x, y - H)) / (2.0 * H)
}

const POINTS: [[f64; 2]; 6] = [[0.1, 0.2], [-0.7, 0.4], [1.1, -0.3], [0.0, -1.4], [-1.2, -1.1], [0.55, 0.9]];

/// The heat source balances c(ϑ)ϑ_t − div(κ∇ϑ) evaluated by finite differences.
#[test]
fn heat_source_matches_finite_differences() {
    let c = HeatDiffusionCase::default();
    for t in [0.0, 0.02, 0.05] {
        for x in POINTS {
            let th = |a: f64, b: f64| c.theta([a, b], t);
            let flux_x = |a: f64, b: f64| c.transport.kappa(th(a, b)) * d_dx(&th, a, b);
            let flux_y = |a: f64, b: f64| c.transport.kappa(th(a, b)) * d_dy(&th, a, b);
            let th0 = th(x[0], x[1]);
            let th_t = (c.theta(x, t + H) - c.theta(x, t - H)) / (2.0 * H);
            let cap = c.gas.cv * c.rho0 + 4.0 * c.gas.a * th0.powi(3);
            let q = cap * th_t - d_dx(&flux_x, x[0], x[1]) - d_dy(&flux_y, x[0], x[1]);
            let got = c.source(x, t);
            assert!((got - q).abs() <= 1e-5 * (1.0 + q.abs()), "t={t} x={x:?}: {got} vs {q}");
        }
    }
}

/// The swirl sources balance the conservative mass, momentum and energy equations.
#[test]
fn swirl_sources_match_finite_differences() {
    let c = SwirlCase::default();
    let gas = c.model.gas;
    let ap = c.model.approx;
    let th = c.theta0;
    let mu = c.model.transport.mu(th);
    let zeta = c.model.transport.zeta(th);
    let pressure = |r: f64| gas.p_molecular(r, th) + gas.p_radiative(th) + ap.delta * r.powf(ap.beta);
    for t in [0.0, 0.05] {
        let u = |a: f64, b: f64, i: usize| c.velocity([a, b], t)[i];
        let grad_u = |a: f64, b: f64| {
            let ux = |p: f64, q: f64| u(p, q, 0);
            let uy = |p: f64, q: f64| u(p, q, 1);
            [[d_dx(&ux, a, b), d_dy(&ux, a, b)], [d_dx(&uy, a, b), d_dy(&uy, a, b)]]
        };
        let stress = |a: f64, b: f64| stress_with(mu, zeta, grad_u(a, b));
        let energy = |a: f64, b: f64, s: f64| {
            let r = c.rho([a, b]);
            let v = c.velocity([a, b], s);
            0.5 * r * (v[0] * v[0] + v[1] * v[1]) + gas.rho_e_molecular(r, th) + gas.a * th.powi(4) + artificial_energy(r, &ap)
        };
        for x in POINTS {
            let rho_t = 0.0;
            let mass_flux = |i: usize| move |a: f64, b: f64| c.rho([a, b]) * u(a, b, i);
            let mass = rho_t + d_dx(&mass_flux(0), x[0], x[1]) + d_dy(&mass_flux(1), x[0], x[1]);
            let mut mom = [0.0; 2];
            for i in 0..2 {
                let m_t = c.rho(x) * (c.velocity(x, t + H)[i] - c.velocity(x, t - H)[i]) / (2.0 * H);
                let fxi = |a: f64, b: f64| {
                    let r = c.rho([a, b]);
                    r * u(a, b, i) * u(a, b, 0) + if i == 0 { pressure(r) } else { 0.0 } - stress(a, b)[i][0]
                };
                let fyi = |a: f64, b: f64| {
                    let r = c.rho([a, b]);
                    r * u(a, b, i) * u(a, b, 1) + if i == 1 { pressure(r) } else { 0.0 } - stress(a, b)[i][1]
                };
                mom[i] = m_t + d_dx(&fxi, x[0], x[1]) + d_dy(&fyi, x[0], x[1]);
            }
            let g = |a: f64, b: f64, j: usize| {
                let s = stress(a, b);
                let v = [u(a, b, 0), u(a, b, 1)];
                (energy(a, b, t) + pressure(c.rho([a, b]))) * v[j] - (s[j][0] * v[0] + s[j][1] * v[1])
            };
            let e_t = (energy(x[0], x[1], t + H) - energy(x[0], x[1], t - H)) / (2.0 * H);
            let en = e_t + d_dx(&|a, b| g(a, b, 0), x[0], x[1]) + d_dy(&|a, b| g(a, b, 1), x[0], x[1]) + ap.lambda() * th.powi(5);
            let src = c.source(x, t);
            assert!(mass.abs() < 1e-6, "mass {mass}");
            for (i, exact) in [mass, mom[0], mom[1], en].into_iter().enumerate() {
                assert!((src[i] - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "t={t} x={x:?} component {i}: {} vs {exact}", src[i]);
            }
        }
    }
}

#[test]
fn breathing_power_matches_energy_derivative() {
    let c = BreathingCase::default();
    let g = c.model.gas;
    let energy = |t: f64| {
        let r = c.radius(t);
        let area = std::f64::consts::PI * r * r;
        let rho = c.density(t);
        let th = c.temperature(t);
        let rd = c.radius_rate(t);
        // ∫ ½ρ|c x|² over the disk = ½ρc²πR⁴/2 with c = Ṙ/R.
        let kinetic = 0.25 * rho * area * rd * rd;
        kinetic + area * (g.rho_e_molecular(rho, th) + g.a * th.powi(4)) + 0.5 * rd * rd + 0.5 * th * th
    };
    for t in [0.0, 0.1, 0.3, 0.5] {
        let fd = (energy(t + 1e-5) - energy(t - 1e-5)) / 2e-5;
        assert!((c.source_power(t) - fd).abs() < 1e-7 * (1.0 + fd.abs()), "{t}: {} vs {fd}", c.source_power(t));
    }
}

#[test]
fn static_equilibrium_residuals_vanish() {
    let r = breathing_identity_check(&BreathingCase::static_equilibrium(), 32).unwrap();
    assert!(r.entropy.residual.abs() <= 1e-10, "entropy {:e}", r.entropy.residual);
    assert!(r.energy.residual.abs() <= 1e-10, "energy {:e}", r.energy.residual);
}

#[test]
fn incompatible_traces_are_rejected() {
    let c = BreathingCase::default();
    let mut f = c.fields(16);
    f.override_theta = Some(c.theta0 + 0.5);
    assert!(matches!(identity_residuals(&c, &f), Err(Error::Validation(_))));
}

#[test]
fn case_names_parse() {
    for (s, c) in [("A", ManufacturedCase::A), ("b", ManufacturedCase::B), ("C", ManufacturedCase::C)] {
        assert_eq!(s.parse::<ManufacturedCase>().unwrap(), c);
    }
    assert!("D".parse::<ManufacturedCase>().is_err());
    assert_eq!(default_resolutions(3), vec![32, 64, 128]);
}

#[test]
fn convergence_table_needs_two_increasing_levels() {
    assert!(residual_convergence(ManufacturedCase::C, &[32]).is_err());
    assert!(residual_convergence(ManufacturedCase::C, &[64, 32]).is_err());
    let t = residual_convergence(ManufacturedCase::C, &[16, 32]).unwrap();
    let csv = t.to_csv();
    assert!(csv.starts_with("n,h,entropy_residual,energy_residual\n"));
    assert!(csv.lines().last().unwrap().starts_with("order,,"));
}

/// On a computed run the coupled entropy residual with a positive test pair obeys the
/// inequality up to discretisation error.
#[test]
fn computed_run_satisfies_entropy_sign() {
    let cfg = config_with(&[("run.windows", "4"), ("grid.n", "48")]).unwrap();
    let p = cfg.problem().unwrap();
    let out = run_splitting(&p).unwrap();
    let fields = TrajectoryFields::new(&out.trajectory).unwrap();
    let model = WeakModel { gas: p.model.gas, transport: p.model.transport, shell: p.shell };
    let frames = &out.trajectory.frames;
    let w = |y: f64, t: f64| {
        let i = frames.partition_point(|f| f.time < t).min(frames.len() - 1);
        frames[i].displacement.eval(y)
    };
    let phi = |x: [f64; 2], _t: f64| 1.0 + 0.1 * x[0] * x[1];
    let psi = |_y: f64, _t: f64| 1.0;
    let times: Vec<f64> = frames.iter().map(|f| f.time).collect();
    let (a, b) = (p.geometry.a, p.geometry.b);
    let layers = BlendLayers { a1: 0.8 * a, a2: 0.4 * a, b1: 0.4 * b, b2: 0.8 * b };
    let pair = build_test_pair(TestField::Scalar(&phi), &psi, &p.geometry, &w, layers, &times).unwrap();
    let r = entropy_inequality_residual(&fields, &model, &pair).unwrap();
    assert!(r.relative() <= 1e-3, "residual {:e} (relative {:e})", r.residual, r.relative());
}
