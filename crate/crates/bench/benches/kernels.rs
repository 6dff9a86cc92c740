use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use fsi_heat_core::config::config_with;
use fsi_heat_core::constitutive::{log_grid, validate_hypotheses};
use fsi_heat_core::extension::build_coefficient_fields;
use fsi_heat_core::fluid::{FluidSolver, FspInput, InterfaceStencil};
use fsi_heat_core::geometry::DisplacementSample;
use fsi_heat_core::run_splitting;
use fsi_heat_core::structure::ssp_advance;

fn small() -> fsi_heat_core::SplittingProblem {
    config_with(&[("grid.n", "32"), ("geometry.n_gamma", "96"), ("shell.modes", "16"), ("run.windows", "1")])
        .unwrap()
        .problem()
        .unwrap()
}

fn constitutive(c: &mut Criterion) {
    let p = small();
    let grid = log_grid(1e-3, 1e3, 20);
    c.bench_function("validate_hypotheses_20x20", |b| {
        b.iter(|| validate_hypotheses(&p.model.gas, &p.model.transport, black_box(&grid), &grid))
    });
}

fn shell(c: &mut Criterion) {
    let p = small();
    let n = p.geometry.n_gamma;
    let zero = vec![0.0; n];
    c.bench_function("ssp_advance", |b| b.iter(|| ssp_advance(black_box(&p.initial_shell), &zero, &zero, &p.shell).unwrap()));
}

fn fluid(c: &mut Criterion) {
    let p = small();
    let w0 = DisplacementSample::constant(p.geometry.n_gamma, 0.0);
    c.bench_function("coefficient_fields", |b| {
        b.iter(|| build_coefficient_fields(&p.geometry, black_box(&w0), &p.model.approx, &p.grid, p.coupling.band_cells).unwrap())
    });
    let coeffs = build_coefficient_fields(&p.geometry, &w0, &p.model.approx, &p.grid, p.coupling.band_cells).unwrap();
    let stencil = InterfaceStencil::build(&p.geometry, &w0, &p.grid, p.fluid.kernel_radius).unwrap();
    let solver = FluidSolver::new(p.grid, p.model, p.fluid).unwrap();
    let shell_v = vec![0.0; p.geometry.n_gamma];
    let shell_theta = p.initial_shell.theta_nodes(p.geometry.n_gamma);
    let input = FspInput {
        coeffs: &coeffs,
        stencil: &stencil,
        shell_v: &shell_v,
        shell_theta: &shell_theta,
        time: 0.0,
        duration: None,
        source: None,
    };
    let mut g = c.benchmark_group("fluid");
    g.sample_size(10);
    g.bench_function("fsp_window_32", |b| b.iter(|| solver.advance(black_box(&p.initial_fluid), &input).unwrap()));
    g.finish();
}

fn coupled(c: &mut Criterion) {
    let mut g = c.benchmark_group("coupled");
    g.sample_size(10);
    g.bench_function("one_window_32", |b| b.iter_batched(small, |p| run_splitting(&p).unwrap(), BatchSize::LargeInput));
    g.finish();
}

criterion_group!(benches, constitutive, shell, fluid, coupled);
criterion_main!(benches);
