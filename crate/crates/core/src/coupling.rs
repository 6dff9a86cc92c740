//! Time marching by operator splitting: on each window the shell is advanced with the
//! lagged fluid traces, the geometry is rebuilt from the new displacement, and the fluid
//! is advanced against the fresh shell data.

use crate::diagnostics::ledger::{EnergyLedger, LedgerRow};
use crate::error::{Error, Result};
use crate::extension::{build_coefficient_fields, CoefficientFields};
use crate::fluid::{compute_traces, fluid_energy, FluidModel, FluidParams, FluidSolver, FluidState, FspInput, FspReport, InterfaceStencil};
use crate::geometry::{DisplacementSample, ReferenceGeometry, Vec2};
use crate::grid::Grid;
use crate::numerics::loglog_slope;
use crate::structure::{project_modes, shell_energy, ssp_advance, synthesize, ShellParams, ShellState, SspReport};

/// Samples of a Γ-field in time, queried by piecewise-linear interpolation.
#[derive(Debug, Clone, Default)]
pub struct TraceHistory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TraceHistory {
    pub fn push(&mut self, t: f64, v: Vec<f64>) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn sample(&self, t: f64) -> Result<Vec<f64>> {
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::Domain("empty history".into())),
        };
        if t < first - 1e-12 || t > last + 1e-12 {
            return Err(Error::Domain(format!("time {t} outside the recorded history [{first}, {last}]")));
        }
        let i = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len());
        if i == self.times.len() || self.times.len() == 1 {
            return Ok(self.values[i - 1].clone());
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        Ok(self.values[i - 1].iter().zip(&self.values[i]).map(|(a, b)| a + s * (b - a)).collect())
    }
}

/// T_Δt f(t) = f(t − Δt) for t ≥ Δt and f(0) on [0, Δt).
pub fn time_shift(history: &TraceHistory, t: f64, dt: f64) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::Domain(format!("time shift needs t >= 0 (got {t})")));
    }
    let origin = history.times.first().copied().unwrap_or(0.0);
    history.sample(if t >= dt { t - dt } else { origin })
}

/// Which fluid trace is handed to the next shell window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSampling {
    /// Trace at the end of the window.
    Final,
    /// Time average of the penalised trace over the window.
    Average,
}

impl std::str::FromStr for TraceSampling {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "final" => Ok(TraceSampling::Final),
            "average" => Ok(TraceSampling::Average),
            other => Err(format!("unknown trace sampling '{other}' (expected final or average)")),
        }
    }
}

impl std::fmt::Display for TraceSampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TraceSampling::Final => "final",
            TraceSampling::Average => "average",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub trace_sampling: TraceSampling,
    /// Smoothing band of the extension masks, in cells.
    pub band_cells: f64,
    /// Degeneracy is declared when the injectivity margin drops below this many cells.
    pub margin_cells: f64,
    /// Keep per-window frames in the trajectory.
    pub store_frames: bool,
}

impl Default for CouplingParams {
    fn default() -> Self {
        CouplingParams { trace_sampling: TraceSampling::Average, band_cells: 2.0, margin_cells: 1.0, store_frames: true }
    }
}

/// Everything needed for one splitting run.
#[derive(Debug, Clone)]
pub struct SplittingProblem {
    pub geometry: ReferenceGeometry,
    pub grid: Grid,
    pub model: FluidModel,
    pub fluid: FluidParams,
    pub shell: ShellParams,
    pub coupling: CouplingParams,
    pub windows: usize,
    pub initial_fluid: FluidState,
    pub initial_shell: ShellState,
}

impl SplittingProblem {
    pub fn validate(&self) -> Result<()> {
        self.model.gas.validate()?;
        self.model.transport.validate()?;
        self.model.approx.validate()?;
        self.fluid.validate()?;
        self.shell.validate()?;
        if (self.shell.dt - self.model.approx.dt).abs() > 1e-15 * self.model.approx.dt
            || (self.shell.delta - self.model.approx.delta).abs() > 0.0
        {
            return Err(Error::Validation("shell and fluid must share Δt and δ".into()));
        }
        if self.initial_fluid.grid != self.grid {
            return Err(Error::Validation("initial fluid state is not on the configured grid".into()));
        }
        if self.geometry.n_gamma <= 2 * self.shell.modes {
            return Err(Error::Validation(format!(
                "{} interface nodes cannot resolve {} shell modes",
                self.geometry.n_gamma, self.shell.modes
            )));
        }
        if self.initial_shell.modes() != self.shell.modes {
            return Err(Error::Validation("initial shell state has the wrong number of modes".into()));
        }
        if (self.grid.half_width - self.geometry.half_width).abs() > 1e-12 {
            return Err(Error::Validation("grid and geometry disagree on the box size".into()));
        }
        Ok(())
    }
}

/// One stored window (frame 0 holds the initial data).
#[derive(Debug, Clone)]
pub struct Frame {
    pub window: usize,
    pub time: f64,
    pub fluid: FluidState,
    pub shell: ShellState,
    pub displacement: DisplacementSample,
    pub interior: Vec<bool>,
    /// Bilinear traces of the fluid at the deformed nodes.
    pub trace_v: Vec<Vec2>,
    pub trace_tau: Vec<f64>,
    /// Penalty-kernel traces at the deformed nodes (the quantities the penalty acts on).
    pub kernel_v: Vec<Vec2>,
    pub kernel_tau: Vec<f64>,
    /// Shell ∂t w and θ at the nodes.
    pub shell_v: Vec<f64>,
    pub shell_theta: Vec<f64>,
    /// Reference normals at the nodes.
    pub normals: Vec<Vec2>,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub frames: Vec<Frame>,
    pub delta: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Completed,
    /// Injectivity lost (or margin below one cell) when building window `window`.
    Degenerate { window: usize, margin: f64, message: String },
}

/// Running state of the march.
#[derive(Debug, Clone)]
pub struct MarchState {
    pub window: usize,
    pub time: f64,
    pub shell: ShellState,
    pub fluid: FluidState,
    pub lagged_v: Vec<f64>,
    pub lagged_tau: Vec<f64>,
    pub ledger: EnergyLedger,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub ledger: EnergyLedger,
    pub stop: StopReason,
    pub final_state: MarchState,
    /// Per-window sub-solver reports.
    pub fluid_reports: Vec<FspReport>,
    pub shell_reports: Vec<SspReport>,
}

impl RunOutcome {
    pub fn degenerate(&self) -> bool {
        matches!(self.stop, StopReason::Degenerate { .. })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Cumulative {
    radiation: f64,
    radiation_exterior: f64,
    shell_visc: f64,
    shell_heat: f64,
    pen_fluid_v: f64,
    pen_fluid_t: f64,
    pen_shell_v: f64,
    pen_shell_t: f64,
    viscous: f64,
    viscous_exterior: f64,
    entropy: f64,
    clamps: usize,
    clamp_energy: f64,
}

struct WindowGeometry {
    w: DisplacementSample,
    coeffs: CoefficientFields,
    stencil: InterfaceStencil,
}

fn window_geometry(problem: &SplittingProblem, shell: &ShellState) -> std::result::Result<WindowGeometry, (f64, String)> {
    let w = shell.displacement(problem.geometry.n_gamma);
    let inj = problem.geometry.check_injectivity(&w);
    let limit = problem.coupling.margin_cells * problem.grid.h();
    if !inj.injective || inj.margin < limit {
        return Err((inj.margin, format!("injectivity margin {:.4e} below {:.4e}", inj.margin, limit)));
    }
    let coeffs = build_coefficient_fields(&problem.geometry, &w, &problem.model.approx, &problem.grid, problem.coupling.band_cells)
        .map_err(|e| (inj.margin, e.to_string()))?;
    let stencil = InterfaceStencil::build(&problem.geometry, &w, &problem.grid, problem.fluid.kernel_radius)
        .map_err(|e| (inj.margin, e.to_string()))?;
    Ok(WindowGeometry { w, coeffs, stencil })
}

fn exterior_mass(state: &FluidState, interior: &[bool]) -> f64 {
    state.grid.integrate_with(|k| if interior[k] { 0.0 } else { state.rho[k] })
}

fn make_frame(
    window: usize,
    time: f64,
    fluid: &FluidState,
    shell: &ShellState,
    geo: &WindowGeometry,
    n_gamma: usize,
) -> Frame {
    let (trace_v, trace_tau) = compute_traces(fluid, &geo.stencil);
    let kx = geo.stencil.interpolate(&fluid.ux);
    let ky = geo.stencil.interpolate(&fluid.uy);
    Frame {
        window,
        time,
        fluid: fluid.clone(),
        shell: shell.clone(),
        displacement: geo.w.clone(),
        interior: geo.coeffs.interior.clone(),
        trace_v,
        trace_tau,
        kernel_v: kx.into_iter().zip(ky).map(|(a, b)| [a, b]).collect(),
        kernel_tau: geo.stencil.interpolate(&fluid.theta),
        shell_v: shell.v_nodes(n_gamma),
        shell_theta: shell.theta_nodes(n_gamma),
        normals: geo.stencil.normals.clone(),
    }
}

fn ledger_row(
    window: usize,
    time: f64,
    problem: &SplittingProblem,
    fluid: &FluidState,
    shell: &ShellState,
    interior: &[bool],
    cum: &Cumulative,
    penalty_last: f64,
    e0: f64,
) -> LedgerRow {
    let fe = fluid_energy(fluid, &problem.model.gas, &problem.model.approx);
    let se = shell_energy(shell, &problem.shell);
    let theta_nodes = shell.theta_nodes(problem.geometry.n_gamma);
    let mut row = LedgerRow {
        window,
        time,
        fluid_kinetic: fe.kinetic,
        fluid_internal: fe.internal,
        fluid_artificial: fe.artificial,
        radiation_cum: cum.radiation,
        shell_kinetic: se.kinetic,
        shell_bending: se.bending,
        shell_rotational: se.rotational,
        shell_thermal: se.thermal,
        shell_visc_diss_cum: cum.shell_visc,
        shell_heat_diss_cum: cum.shell_heat,
        pen_fluid_v_cum: cum.pen_fluid_v,
        pen_fluid_t_cum: cum.pen_fluid_t,
        pen_shell_v_cum: cum.pen_shell_v,
        pen_shell_t_cum: cum.pen_shell_t,
        penalty_last_window: penalty_last,
        lhs_total: 0.0,
        e0,
        slack: 0.0,
        exterior_mass: exterior_mass(fluid, interior),
        radiation_exterior_cum: cum.radiation_exterior,
        viscous_diss_cum: cum.viscous,
        viscous_diss_exterior_cum: cum.viscous_exterior,
        entropy_production_cum: cum.entropy,
        min_shell_theta: theta_nodes.iter().copied().fold(f64::INFINITY, f64::min),
        clamp_events: cum.clamps,
        clamp_energy_cum: cum.clamp_energy,
    };
    row.lhs_total = row.recompute_lhs();
    row.slack = row.e0 - row.lhs_total;
    row
}

/// Lagged shell input of the first window: v₀·n and θ₀ from the initial shell data.
fn initial_lagged(problem: &SplittingProblem) -> (Vec<f64>, Vec<f64>) {
    let n = problem.geometry.n_gamma;
    (problem.initial_shell.v_nodes(n), problem.initial_shell.theta_nodes(n))
}

/// Energy (δ/2)(‖ĝ‖² + ‖ĥ‖²) supplied to the shell by lagged data that no fluid window paid for.
fn lagged_input(problem: &SplittingProblem, v: &[f64], tau: &[f64]) -> f64 {
    let m = problem.shell.modes;
    let norm = |c: &[num_complex::Complex64]| -> f64 {
        c.iter().enumerate().map(|(i, z)| ShellParams::parseval_weight(i) * z.norm_sqr()).sum()
    };
    let g = project_modes(v, m);
    let h = if problem.shell.thermal_coupling { norm(&project_modes(tau, m)) } else { 0.0 };
    0.5 * problem.shell.delta * (norm(&g) + h)
}

/// Runs the splitting scheme for `problem.windows` windows (or until degeneracy).
pub fn run_splitting(problem: &SplittingProblem) -> Result<RunOutcome> {
    problem.validate()?;
    let n_gamma = problem.geometry.n_gamma;
    let dt = problem.model.approx.dt;
    let solver = FluidSolver::new(problem.grid, problem.model, problem.fluid)?;
    let geo0 = window_geometry(problem, &problem.initial_shell)
        .map_err(|(_, m)| Error::Degeneracy(format!("initial configuration: {m}")))?;

    // The fluid step re-masks on entry (ρe kept, ϑ re-solved), so no alignment is needed here.
    let mut fluid = problem.initial_fluid.clone();
    let mut shell = problem.initial_shell.clone();
    let (mut lagged_v, mut lagged_tau) = initial_lagged(problem);

    let fe0 = fluid_energy(&fluid, &problem.model.gas, &problem.model.approx).total();
    let se0 = shell_energy(&shell, &problem.shell).total();
    let e0 = fe0 + se0 + lagged_input(problem, &lagged_v, &lagged_tau);

    let mut cum = Cumulative::default();
    // One ledger row per completed window; E₀ is carried on every row.
    let mut ledger = EnergyLedger::default();
    let mut trajectory = Trajectory { frames: Vec::new(), delta: problem.model.approx.delta, dt };
    if problem.coupling.store_frames {
        trajectory.frames.push(make_frame(0, 0.0, &fluid, &shell, &geo0, n_gamma));
    }
    let mut fluid_reports = Vec::new();
    let mut shell_reports = Vec::new();
    let mut stop = StopReason::Completed;
    let mut time = 0.0;

    for n in 0..problem.windows {
        let ssp = ssp_advance(&shell, &lagged_v, &lagged_tau, &problem.shell)
            .map_err(|e| Error::Solver(format!("window {n}, structure step: {e}")))?;
        let geo = match window_geometry(problem, &ssp.state) {
            Ok(g) => g,
            Err((margin, message)) => {
                stop = StopReason::Degenerate { window: n, margin, message };
                break;
            }
        };
        let shell_v = synthesize(&ssp.report.mean_v, n_gamma);
        let shell_theta = synthesize(&ssp.report.mean_theta, n_gamma);
        let input = FspInput {
            coeffs: &geo.coeffs,
            stencil: &geo.stencil,
            shell_v: &shell_v,
            shell_theta: &shell_theta,
            time,
            duration: None,
            source: None,
        };
        let fsp = solver.advance(&fluid, &input).map_err(|e| match e {
            Error::Degeneracy(m) => Error::Degeneracy(m),
            other => Error::Solver(format!("window {n}, fluid step: {other}")),
        })?;
        let r = &fsp.report;
        cum.radiation += r.rad_total;
        cum.radiation_exterior += r.rad_exterior;
        cum.shell_visc += ssp.report.viscous_dissipation;
        cum.shell_heat += ssp.report.heat_dissipation;
        cum.pen_fluid_v += r.pen_v_cross;
        cum.pen_fluid_t += r.pen_t_cross;
        cum.pen_shell_v += ssp.report.penalty_v_cross;
        cum.pen_shell_t += ssp.report.penalty_t_cross;
        cum.viscous += r.viscous_diss;
        cum.viscous_exterior += r.viscous_diss_exterior;
        cum.entropy += r.entropy_production;
        cum.clamps += r.clamp_events;
        cum.clamp_energy += r.clamp_energy;

        let (trace_v, trace_tau) = match problem.coupling.trace_sampling {
            TraceSampling::Average => (&r.mean_trace_v, &r.mean_trace_tau),
            TraceSampling::Final => (&r.final_trace_v, &r.final_trace_tau),
        };
        lagged_v = trace_v
            .iter()
            .zip(&geo.stencil.normals)
            .map(|(v, nn)| v[0] * nn[0] + v[1] * nn[1])
            .collect();
        lagged_tau = trace_tau.clone();

        time = (n + 1) as f64 * dt;
        shell = ssp.state;
        fluid = fsp.state;
        let penalty_last = r.pen_v_self + r.pen_t_self;
        ledger.push(ledger_row(n + 1, time, problem, &fluid, &shell, &geo.coeffs.interior, &cum, penalty_last, e0));
        if problem.coupling.store_frames {
            trajectory.frames.push(make_frame(n + 1, time, &fluid, &shell, &geo, n_gamma));
        }
        fluid_reports.push(fsp.report);
        shell_reports.push(ssp.report);
    }

    let degenerate = matches!(stop, StopReason::Degenerate { .. });
    Ok(RunOutcome {
        trajectory,
        ledger: ledger.clone(),
        stop,
        final_state: MarchState {
            window: fluid_reports.len(),
            time,
            shell,
            fluid,
            lagged_v,
            lagged_tau,
            ledger,
            degenerate,
        },
        fluid_reports,
        shell_reports,
    })
}

/// Which approximation parameter a continuation study sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    K(Vec<f64>),
    Delta(Vec<f64>),
    Dt(Vec<f64>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::K(_) => "k",
            Sweep::Delta(_) => "delta",
            Sweep::Dt(_) => "dt",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Sweep::K(v) | Sweep::Delta(v) | Sweep::Dt(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub value: f64,
    pub windows: usize,
    pub degenerate: bool,
    /// sup over windows of the exterior mass.
    pub max_exterior_mass: f64,
    pub final_exterior_mass: f64,
    pub total_mass: f64,
    pub radiation_exterior: f64,
    pub viscous_exterior: f64,
    /// δ∫Σ(|v − ∂t w n|² + |τ − θ|²)Δy dt from the window-end frames (trapezoid in time).
    pub penalization_defect: f64,
    /// The same integral accumulated at fluid sub-step resolution.
    pub penalization_defect_substep: f64,
    /// ∫ δρ^β/(β−1) at the final time.
    pub artificial_energy: f64,
    pub min_relative_slack: f64,
    /// Final fluid fields restricted to cells inside Ω^w (others set to 0).
    pub interior_rho: Vec<f64>,
    pub interior_theta: Vec<f64>,
    pub interior_mx: Vec<f64>,
    pub interior_my: Vec<f64>,
}

impl StudyRow {
    fn degenerate_initial(value: f64, total_mass: f64) -> Self {
        StudyRow {
            value,
            windows: 0,
            degenerate: true,
            max_exterior_mass: f64::NAN,
            final_exterior_mass: f64::NAN,
            total_mass,
            radiation_exterior: f64::NAN,
            viscous_exterior: f64::NAN,
            penalization_defect: f64::NAN,
            penalization_defect_substep: f64::NAN,
            artificial_energy: f64::NAN,
            min_relative_slack: f64::NAN,
            interior_rho: Vec::new(),
            interior_theta: Vec::new(),
            interior_mx: Vec::new(),
            interior_my: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub parameter: &'static str,
    pub rows: Vec<StudyRow>,
    pub slope_exterior_mass: f64,
    pub slope_radiation_exterior: f64,
    pub slope_viscous_exterior: f64,
    pub slope_defect: f64,
    pub slope_defect_substep: f64,
    /// ‖f_{i+1} − f_i‖_{L²(Ω)} of the interior fields between successive runs.
    pub successive_differences: Vec<f64>,
}

/// Hook that rebuilds the problem for a new parameter value (initial data may depend on it).
pub type Rebuild<'a> = &'a dyn Fn(&SplittingProblem, &Sweep, f64) -> Result<SplittingProblem>;

/// Default rebuild: sets the parameter, keeps the horizon T = windows·Δt fixed for Δt sweeps.
pub fn apply_parameter(base: &SplittingProblem, sweep: &Sweep, value: f64) -> Result<SplittingProblem> {
    let mut p = base.clone();
    match sweep {
        Sweep::K(_) => p.model.approx.k = value,
        Sweep::Delta(_) => {
            p.model.approx.delta = value;
            p.shell.delta = value;
        }
        Sweep::Dt(_) => {
            let horizon = base.windows as f64 * base.model.approx.dt;
            p.model.approx.dt = value;
            p.shell.dt = value;
            p.windows = (horizon / value).round() as usize;
        }
    }
    p.validate()?;
    Ok(p)
}

/// One run per sweep value (monotone decreasing), tabulating the limit monitors.
pub fn continuation_study(base: &SplittingProblem, sweep: &Sweep, rebuild: Option<Rebuild<'_>>) -> Result<StudyReport> {
    let values = sweep.values();
    if values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Validation(format!("{} sweep must be strictly decreasing", sweep.name())));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let problem = match rebuild {
            Some(f) => f(base, sweep, v)?,
            None => apply_parameter(base, sweep, v)?,
        };
        let out = match run_splitting(&problem) {
            Ok(out) => out,
            Err(Error::Degeneracy(_)) => {
                // The initial configuration itself is degenerate: record and move on.
                rows.push(StudyRow::degenerate_initial(v, problem.initial_fluid.mass()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let last = out.ledger.last().copied().unwrap_or_default();
        let interior = out
            .trajectory
            .frames
            .last()
            .map(|f| f.interior.clone())
            .unwrap_or_else(|| vec![true; problem.grid.len()]);
        let f = &out.final_state.fluid;
        let mask = |field: &[f64]| -> Vec<f64> { field.iter().zip(&interior).map(|(x, &i)| if i { *x } else { 0.0 }).collect() };
        rows.push(StudyRow {
            value: v,
            windows: out.fluid_reports.len(),
            degenerate: out.degenerate(),
            max_exterior_mass: out.ledger.rows.iter().map(|r| r.exterior_mass).fold(0.0, f64::max),
            final_exterior_mass: last.exterior_mass,
            total_mass: f.mass(),
            radiation_exterior: last.radiation_exterior_cum,
            viscous_exterior: last.viscous_diss_exterior_cum,
            penalization_defect: crate::diagnostics::penalization_defect(&out.trajectory),
            penalization_defect_substep: crate::diagnostics::penalization_defect_from_ledger(&out.ledger, problem.model.approx.dt),
            artificial_energy: last.fluid_artificial,
            min_relative_slack: out.ledger.min_relative_slack(),
            interior_rho: mask(&f.rho),
            interior_theta: mask(&f.theta),
            interior_mx: mask(&f.mx),
            interior_my: mask(&f.my),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let slope = |f: &dyn Fn(&StudyRow) -> f64| -> f64 {
        let ys: Vec<f64> = rows.iter().map(f).collect();
        loglog_slope(&xs, &ys)
    };
    let successive_differences = rows
        .windows(2)
        .map(|w| {
            if w[0].interior_rho.is_empty() || w[1].interior_rho.is_empty() {
                return f64::NAN;
            }
            let h2 = base.grid.cell_area();
            let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            (h2 * (d(&w[0].interior_rho, &w[1].interior_rho)
                + d(&w[0].interior_theta, &w[1].interior_theta)
                + d(&w[0].interior_mx, &w[1].interior_mx)
                + d(&w[0].interior_my, &w[1].interior_my)))
                .sqrt()
        })
        .collect();
    Ok(StudyReport {
        parameter: sweep.name(),
        slope_exterior_mass: slope(&|r| r.max_exterior_mass),
        slope_radiation_exterior: slope(&|r| r.radiation_exterior),
        slope_viscous_exterior: slope(&|r| r.viscous_exterior),
        slope_defect: slope(&|r| r.penalization_defect),
        slope_defect_substep: slope(&|r| r.penalization_defect_substep),
        successive_differences,
        rows,
    })
}
