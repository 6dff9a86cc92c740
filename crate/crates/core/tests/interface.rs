use fsi_heat_core::fluid::InterfaceStencil;
use fsi_heat_core::geometry::{DisplacementSample, ReferenceGeometry};
use fsi_heat_core::Grid;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn stencil(amp: f64) -> InterfaceStencil {
    let g = ReferenceGeometry::default();
    let w = DisplacementSample::from_fn(g.n_gamma, |y| amp * (TAU * 2.0 * y).cos());
    InterfaceStencil::build(&g, &w, &Grid::new(64, 2.0), 2.0).unwrap()
}

/// ⟨spread g, φ⟩_B = ⟨g, interp φ⟩_Γ to round-off.
#[test]
fn spread_is_adjoint_of_interpolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for amp in [0.0, 0.1, -0.2] {
        let st = stencil(amp);
        let phi: Vec<f64> = (0..st.grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..st.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = st.grid.cell_area() * st.spread(&g).iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>();
        let rhs = st.gamma_dot(&g, &st.interpolate(&phi));
        assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn kernel_weights_sum_to_one() {
    let st = stencil(0.15);
    for ws in &st.kernel {
        let s: f64 = ws.iter().map(|w| w.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}

#[test]
fn spread_of_unit_density_carries_gamma_length() {
    // Σ h² spread(1) = Δy Σ 1 = 1 (the Γ-parameter has unit length).
    let st = stencil(0.1);
    let total = st.grid.cell_area() * st.spread(&vec![1.0; st.len()]).iter().sum::<f64>();
    assert!((total - 1.0).abs() < 1e-13);
}

#[test]
fn node_near_box_edge_is_degenerate() {
    let grid = Grid::new(32, 2.0);
    let r = InterfaceStencil::from_points(&grid, vec![[1.95, 0.0]], vec![[1.0, 0.0]], vec![1.0], 2.0);
    assert!(matches!(r, Err(fsi_heat_core::Error::Degeneracy(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Trace interpolation reproduces affine fields exactly.
    #[test]
    fn traces_exact_on_affine_fields(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, amp in -0.2f64..0.2) {
        let st = stencil(amp);
        let field: Vec<f64> = (0..st.grid.len()).map(|k| {
            let x = st.grid.center(k);
            c0 + c1 * x[0] + c2 * x[1]
        }).collect();
        for (v, x) in st.bilinear_interpolate(&field).iter().zip(&st.positions) {
            let exact = c0 + c1 * x[0] + c2 * x[1];
            prop_assert!((v - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }
}
