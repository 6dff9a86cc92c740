use fsi_heat_core::geometry::{Chart, DisplacementSample, ReferenceGeometry};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn ellipse() -> ReferenceGeometry {
    ReferenceGeometry::new(Chart::Ellipse { a: 1.0, b: 0.8 }, -0.3, 0.3, 2.0, 128).unwrap()
}

#[test]
fn flow_map_is_identity_for_zero_displacement() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in [ReferenceGeometry::default(), ellipse()] {
        let w = DisplacementSample::constant(g.n_gamma, 0.0);
        for _ in 0..2000 {
            let x = [rng.gen_range(-1.9..1.9), rng.gen_range(-1.9..1.9)];
            assert_eq!(g.flow_map(&w, x).unwrap(), x);
            assert_eq!(g.jacobian_factor(&w, x), 1.0);
        }
    }
}

#[test]
fn constant_displacement_scales_circle_area_element() {
    let g = ReferenceGeometry::default();
    let w = DisplacementSample::constant(g.n_gamma, 0.1);
    for k in 0..100 {
        let y = k as f64 / 100.0 + 0.003;
        let (_, s) = g.deformed_normal_and_area(&w, y).unwrap();
        assert!((s - 1.1).abs() <= 1e-6, "S^w({y}) = {s}");
    }
}

#[test]
fn jacobian_factor_within_bounds_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = ReferenceGeometry::default();
    let w = DisplacementSample::from_fn(g.n_gamma, |y| 0.12 * (TAU * 2.0 * y).cos() - 0.05 * (TAU * 5.0 * y).sin());
    let (lo, hi) = g.jacobian_bounds(&w);
    assert!(lo > 0.0);
    for _ in 0..10_000 {
        let r = rng.gen_range(0.3..1.7);
        let a = rng.gen_range(0.0..TAU);
        let j = g.jacobian_factor(&w, [r * a.cos(), r * a.sin()]);
        assert!(j >= lo - 1e-12 && j <= hi + 1e-12, "{j} outside [{lo}, {hi}]");
    }
}

#[test]
fn displacement_leaving_tube_is_degenerate() {
    let g = ReferenceGeometry::default();
    let w = DisplacementSample::constant(g.n_gamma, 0.6);
    assert!(!g.check_injectivity(&w).injective);
    assert!(matches!(g.flow_map(&w, [1.0, 0.0]), Err(fsi_heat_core::Error::Degeneracy(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The flow map sends Γ onto the deformed curve.
    #[test]
    fn flow_map_moves_gamma_to_deformed_curve(c in -0.3f64..0.3, s in -0.1f64..0.1, y in 0.0f64..1.0) {
        let g = ReferenceGeometry::default();
        let w = DisplacementSample::from_fn(g.n_gamma, |t| c * (TAU * t).cos() + s * (TAU * 3.0 * t).sin());
        prop_assume!(g.check_injectivity(&w).injective && g.jacobian_bounds(&w).0 > 0.0);
        let x = g.chart.point(y);
        let a = g.flow_map(&w, x).unwrap();
        let b = g.deformed_point(&w, y);
        prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    /// The Jacobian factor is the normal derivative of the flow map along n.
    #[test]
    fn jacobian_factor_matches_normal_derivative(c in -0.2f64..0.2, y in 0.0f64..1.0, d in -0.25f64..0.25) {
        let g = ReferenceGeometry::default();
        let w = DisplacementSample::from_fn(g.n_gamma, |t| c * (TAU * 2.0 * t).cos());
        let p = g.chart.point(y);
        let n = g.chart.normal(y);
        let at = |s: f64| {
            let x = g.flow_map(&w, [p[0] + s * n[0], p[1] + s * n[1]]).unwrap();
            x[0] * n[0] + x[1] * n[1]
        };
        let h = 1e-6;
        let fd = (at(d + h) - at(d - h)) / (2.0 * h);
        let j = g.jacobian_factor(&w, [p[0] + d * n[0], p[1] + d * n[1]]);
        prop_assert!((fd - j).abs() < 1e-6, "fd {fd} vs {j}");
    }
}
