//! Fluid sub-problem on the fixed box B. One window is advanced by CFL-limited
//! sub-steps, each split into
//!
//! 1. Rusanov transport of (ρ, m, E) (pressure work and artificial pressure included),
//! 2. an implicit momentum solve with the viscous operator and the interface penalty,
//! 3. the explicit interface heat penalty and implicit conduction,
//! 4. the implicit radiation sink λϑ⁵.
//!
//! Every exchange between kinetic and internal energy is booked explicitly so the
//! window energy balance closes up to solver tolerances.

pub mod heat;
pub mod state;
pub mod stencil;
pub mod transport;
pub mod viscous;

use rayon::prelude::*;

use crate::constitutive::{GasModel, TransportModel};
use crate::error::{Error, Result};
use crate::extension::{artificial_energy, ApproxParams, CoefficientFields};
use crate::geometry::Vec2;
use crate::grid::Grid;
use crate::numerics::{pcg, tree_sum};

pub use heat::{conduction_step, heat_penalty_source, radiation_sink, ConductionOutcome, FaceConductivity};
pub use state::{FluidState, VACUUM};
pub use stencil::{compute_traces, cosine_kernel, InterfaceStencil};
pub use transport::{Conserved, SourceFn};
pub use viscous::ViscousTopology;

use transport::{max_speed, primitives, transport_step, Thermo};

/// Numerical knobs of the fluid solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub cfl: f64,
    /// Penalty kernel radius in cells.
    pub kernel_radius: f64,
    pub theta_floor: f64,
    pub max_substeps: usize,
    pub pcg_tol: f64,
    pub newton_iters: usize,
}

impl Default for FluidParams {
    fn default() -> Self {
        FluidParams {
            cfl: 0.4,
            kernel_radius: 2.0,
            theta_floor: crate::constitutive::THETA_FLOOR,
            max_substeps: 20_000,
            pcg_tol: 1e-10,
            newton_iters: 4,
        }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Validation(format!("fluid.cfl = {} must lie in (0, 1]", self.cfl)));
        }
        if !(self.kernel_radius >= 1.0) {
            return Err(Error::Validation("fluid.kernel_radius must be at least 1".into()));
        }
        if !(self.theta_floor > 0.0) {
            return Err(Error::Validation("fluid.theta_floor must be positive".into()));
        }
        if self.max_substeps == 0 || self.newton_iters == 0 || !(self.pcg_tol > 0.0) {
            return Err(Error::Validation("fluid solver limits must be positive".into()));
        }
        Ok(())
    }
}

/// Constitutive data plus approximation parameters.
#[derive(Debug, Clone, Copy)]
pub struct FluidModel {
    pub gas: GasModel,
    pub transport: TransportModel,
    pub approx: ApproxParams,
}

impl Default for FluidModel {
    fn default() -> Self {
        FluidModel { gas: GasModel::default(), transport: TransportModel::default(), approx: ApproxParams::default() }
    }
}

/// Window data handed to the fluid step.
pub struct FspInput<'a> {
    pub coeffs: &'a CoefficientFields,
    pub stencil: &'a InterfaceStencil,
    /// Shell normal velocity at the Γ-nodes (window mean of the structure step).
    pub shell_v: &'a [f64],
    /// Shell temperature at the Γ-nodes (window mean of the structure step).
    pub shell_theta: &'a [f64],
    /// Absolute time at window start (for manufactured sources).
    pub time: f64,
    /// Window length; defaults to the model's Δt when `None`.
    pub duration: Option<f64>,
    pub source: Option<SourceFn<'a>>,
}

/// Integrals accumulated over one fluid window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FspReport {
    /// λ∫∫ϑ⁵ over B and over B∖Ω^w.
    pub rad_total: f64,
    pub rad_exterior: f64,
    /// (δ/2Δt)∫Σ|v − ∂t w n|²Δy, (δ/2Δt)∫Σ|v|²Δy and (δ/2Δt)∫Σ|∂t w|²Δy.
    pub pen_v_cross: f64,
    pub pen_v_self: f64,
    pub input_v: f64,
    /// Same for the temperature penalty.
    pub pen_t_cross: f64,
    pub pen_t_self: f64,
    pub input_t: f64,
    /// Time averages of the penalised traces (velocity vector, temperature) per node.
    pub mean_trace_v: Vec<Vec2>,
    pub mean_trace_tau: Vec<f64>,
    /// Penalised traces at window end.
    pub final_trace_v: Vec<Vec2>,
    pub final_trace_tau: Vec<f64>,
    /// ∫∫ S_ω:∇u over B and over B∖Ω^w.
    pub viscous_diss: f64,
    pub viscous_diss_exterior: f64,
    /// ∫∫ (1/ϑ)(S_ω:∇u + κ_ν|∇ϑ|²/ϑ).
    pub entropy_production: f64,
    /// Smallest cell value of the entropy-production integrand over all sub-steps.
    pub min_entropy_integrand: f64,
    /// Temperature floor hits and the energy they injected.
    pub clamp_events: usize,
    pub clamp_energy: f64,
    /// Transport sub-steps that fell back to forward Euler.
    pub fallback_events: usize,
    pub substeps: usize,
    pub max_cg_iters: usize,
    /// Largest relative mass change over a sub-step.
    pub max_mass_drift: f64,
}

#[derive(Debug, Clone)]
pub struct FspStep {
    pub state: FluidState,
    pub report: FspReport,
}

/// Fluid solver bound to a grid; caches the viscous stencil.
#[derive(Debug, Clone)]
pub struct FluidSolver {
    pub grid: Grid,
    pub model: FluidModel,
    pub params: FluidParams,
    topology: ViscousTopology,
}

impl FluidSolver {
    pub fn new(grid: Grid, model: FluidModel, params: FluidParams) -> Result<Self> {
        model.gas.validate()?;
        model.transport.validate()?;
        model.approx.validate()?;
        params.validate()?;
        Ok(FluidSolver { grid, model, params, topology: ViscousTopology::new(grid) })
    }

    pub fn topology(&self) -> &ViscousTopology {
        &self.topology
    }

    /// Advances `state` over one window.
    pub fn advance(&self, state: &FluidState, input: &FspInput<'_>) -> Result<FspStep> {
        let grid = self.grid;
        if state.grid != grid {
            return Err(Error::Validation("fluid state lives on a different grid".into()));
        }
        let nc = grid.len();
        let nodes = input.stencil.len();
        if input.shell_v.len() != nodes || input.shell_theta.len() != nodes {
            return Err(Error::Validation("shell data must be sampled at the stencil nodes".into()));
        }
        let coeffs = input.coeffs;
        let gas = &self.model.gas;
        let tr = &self.model.transport;
        let approx = &self.model.approx;
        let prm = &self.params;
        let window = input.duration.unwrap_or(approx.dt);
        // Penalty rate δ/Δt always uses the splitting step, not the window length.
        let rate = approx.delta / approx.dt;
        let lambda = approx.lambda();
        let h2 = grid.cell_area();
        let chi = &coeffs.chi_eta;
        let stencil = input.stencil;

        let mut report = FspReport { min_entropy_integrand: f64::INFINITY, ..Default::default() };

        // Re-mask: keep ρe_η and re-solve ϑ with the new radiation weight.
        let mut u = Conserved::from_state(state, gas, approx);
        let mut theta: Vec<f64> = (0..nc)
            .into_par_iter()
            .map(|k| {
                if state.chi[k] == chi[k] {
                    state.theta[k]
                } else {
                    gas.temperature_from_energy(state.rho[k], state.internal_density(gas, k), chi[k], prm.theta_floor, state.theta[k]).0
                }
            })
            .collect();
        let mut vel: Vec<f64> = state.ux.iter().chain(&state.uy).copied().collect();
        let th = Thermo { gas, approx, chi, floor: prm.theta_floor };

        // Shell targets a_j = V_j n_j.
        let target: Vec<Vec2> = (0..nodes).map(|j| [input.shell_v[j] * stencil.normals[j][0], input.shell_v[j] * stencil.normals[j][1]]).collect();
        let target_sq: f64 = stencil.dy * target.iter().map(|a| a[0] * a[0] + a[1] * a[1]).sum::<f64>();
        let theta_sq: f64 = stencil.dy * input.shell_theta.iter().map(|t| t * t).sum::<f64>();

        let mut vbar = vec![[0.0; 2]; nodes];
        let mut taubar = vec![0.0; nodes];
        let mut last_v = vec![[0.0; 2]; nodes];
        let mut last_tau = vec![0.0; nodes];

        // Penalty Gram diagonal Σ_j w_jc² per cell.
        let kernel_diag: Vec<f64> = stencil.cell_nodes.iter().map(|ns| ns.iter().map(|&(_, w)| w * w).sum()).collect();

        let mut t = 0.0;
        while t < window * (1.0 - 1e-12) {
            if report.substeps >= prm.max_substeps {
                return Err(Error::Solver(format!(
                    "fluid step needed more than {} sub-steps (CFL refinement cap)",
                    prm.max_substeps
                )));
            }
            let (prims, c0) = primitives(&u, &th, &mut theta);
            report.clamp_events += c0;
            let smax = max_speed(&prims);
            let mut dt = if smax > 0.0 { prm.cfl * grid.h() / (2.0 * smax) } else { window };
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Solver(format!("invalid CFL step {dt} (max wave speed {smax})")));
            }
            if t + dt > window || window - (t + dt) < 1e-9 * window {
                dt = window - t;
            }
            let now = input.time + t;
            let mass0 = tree_sum(nc, |k| u.rho[k]);

            // (1) transport
            let outcome = transport_step(&grid, &mut u, &mut theta, &prims, dt, &th, input.source, now);
            report.fallback_events += outcome.fallback as usize;
            report.clamp_events += outcome.clamps;
            let mass1 = tree_sum(nc, |k| u.rho[k]);
            if mass0 > 0.0 {
                report.max_mass_drift = report.max_mass_drift.max((mass1 - mass0).abs() / mass0);
            }

            // A negative thermal part here is left in ρe_η: the momentum step's
            // dissipation usually restores it within the window.
            let mut ie: Vec<f64> = (0..nc).map(|k| u.internal(k, approx)).collect();
            for k in 0..nc {
                let (tk, c) = th.temperature(k, u.rho[k], ie[k], theta[k]);
                theta[k] = tk;
                report.clamp_events += c as usize;
            }

            // (2) momentum
            let rho_eff: Vec<f64> = u.rho.iter().map(|&r| if r > VACUUM { r } else { 0.0 }).collect();
            let ustar: Vec<f64> = (0..2 * nc)
                .map(|q| {
                    let k = q % nc;
                    if rho_eff[k] > 0.0 {
                        (if q < nc { u.mx[k] } else { u.my[k] }) / rho_eff[k]
                    } else {
                        0.0
                    }
                })
                .collect();
            let mu_c: Vec<f64> = (0..nc).map(|k| coeffs.f_omega[k] * tr.mu(theta[k])).collect();
            let zeta_c: Vec<f64> = (0..nc).map(|k| coeffs.f_omega[k] * tr.zeta(theta[k])).collect();
            let mu_v = self.topology.vertex_average(&mu_c);
            let zeta_v = self.topology.vertex_average(&zeta_c);
            let pen = rate * stencil.dy;
            let mut rhs: Vec<f64> = (0..2 * nc).map(|q| h2 / dt * rho_eff[q % nc] * ustar[q]).collect();
            for (j, ws) in stencil.kernel.iter().enumerate() {
                for &(c, w) in ws {
                    rhs[c] += pen * w * target[j][0];
                    rhs[nc + c] += pen * w * target[j][1];
                }
            }
            let mut diag = self.topology.diagonal(&mu_v, &zeta_v);
            for q in 0..2 * nc {
                diag[q] += h2 / dt * rho_eff[q % nc] + pen * kernel_diag[q % nc];
            }
            let apply = |x: &[f64], out: &mut [f64]| {
                self.topology.apply(&mu_v, &zeta_v, x, out);
                for q in 0..2 * nc {
                    out[q] += h2 / dt * rho_eff[q % nc] * x[q];
                }
                if nodes > 0 {
                    let (xx, xy) = x.split_at(nc);
                    let vx = stencil.interpolate(xx);
                    let vy = stencil.interpolate(xy);
                    let (ox, oy) = out.split_at_mut(nc);
                    ox.par_iter_mut().zip(oy.par_iter_mut()).enumerate().for_each(|(c, (a, b))| {
                        for &(j, w) in &stencil.cell_nodes[c] {
                            *a += pen * w * vx[j];
                            *b += pen * w * vy[j];
                        }
                    });
                }
            };
            let stats = pcg(apply, &diag, &rhs, &mut vel, prm.pcg_tol, 20 * nc + 1000)
                .map_err(|e| Error::Solver(format!("momentum solve: {e}")))?;
            report.max_cg_iters = report.max_cg_iters.max(stats.iterations);
            let (ux, uy) = vel.split_at(nc);
            let visc = self.topology.cell_dissipation(&mu_v, &zeta_v, ux, uy);
            for k in 0..nc {
                let du = [ux[k] - ustar[k], uy[k] - ustar[nc + k]];
                ie[k] += 0.5 * rho_eff[k] * (du[0] * du[0] + du[1] * du[1]) + dt * visc[k];
                u.mx[k] = rho_eff[k] * ux[k];
                u.my[k] = rho_eff[k] * uy[k];
            }
            let vd = dt * h2 * tree_sum(nc, |k| visc[k]);
            report.viscous_diss += vd;
            report.viscous_diss_exterior += dt * h2 * tree_sum(nc, |k| if coeffs.interior[k] { 0.0 } else { visc[k] });
            if nodes > 0 {
                let vx = stencil.interpolate(ux);
                let vy = stencil.interpolate(uy);
                let mut cross = 0.0;
                let mut selfp = 0.0;
                for j in 0..nodes {
                    let d = [vx[j] - target[j][0], vy[j] - target[j][1]];
                    cross += d[0] * d[0] + d[1] * d[1];
                    selfp += vx[j] * vx[j] + vy[j] * vy[j];
                    vbar[j][0] += dt * vx[j];
                    vbar[j][1] += dt * vy[j];
                    last_v[j] = [vx[j], vy[j]];
                }
                report.pen_v_cross += 0.5 * dt * rate * stencil.dy * cross;
                report.pen_v_self += 0.5 * dt * rate * stencil.dy * selfp;
                report.input_v += 0.5 * dt * rate * target_sq;
            }
            for k in 0..nc {
                let (tk, c) = th.temperature(k, u.rho[k], ie[k], theta[k]);
                theta[k] = tk;
                report.clamp_events += c as usize;
            }

            // (3) heat penalty and conduction
            let mut source = vec![0.0; nc];
            if nodes > 0 {
                let tau = stencil.interpolate(&theta);
                let cap: Vec<f64> = (0..nc).map(|k| gas.heat_capacity(u.rho[k], theta[k], chi[k])).collect();
                source = heat_penalty_source(stencil, &tau, input.shell_theta, rate, &cap);
                let mut cross = 0.0;
                let mut selfp = 0.0;
                for j in 0..nodes {
                    cross += (tau[j] - input.shell_theta[j]).powi(2);
                    selfp += tau[j] * tau[j];
                    taubar[j] += dt * tau[j];
                    last_tau[j] = tau[j];
                }
                report.pen_t_cross += 0.5 * dt * rate * stencil.dy * cross;
                report.pen_t_self += 0.5 * dt * rate * stencil.dy * selfp;
                report.input_t += 0.5 * dt * rate * theta_sq;
            }
            let chi_nu = &coeffs.chi_nu;
            let cond = conduction_step(
                &grid,
                gas,
                &u.rho,
                &ie,
                chi,
                &|k, tk| chi_nu[k] * tr.kappa(tk),
                &theta,
                &source,
                dt,
                prm.theta_floor,
                prm.pcg_tol,
                prm.newton_iters,
            )?;
            report.clamp_events += cond.clamps;
            report.max_cg_iters = report.max_cg_iters.max(cond.cg_iterations);
            ie = cond.rho_e;
            theta = cond.theta;

            // Entropy-production integrand, cell by cell.
            let grad = cond.faces.cell_gradient_energy(&grid, &theta);
            let sigma: Vec<f64> = (0..nc)
                .map(|k| {
                    let tk = theta[k].max(prm.theta_floor);
                    (visc[k] + grad[k] / tk) / tk
                })
                .collect();
            let smin = sigma.iter().copied().fold(f64::INFINITY, f64::min);
            report.min_entropy_integrand = report.min_entropy_integrand.min(smin);
            report.entropy_production += dt * h2 * tree_sum(nc, |k| sigma[k]);

            // (4) radiation
            let rad: Vec<(f64, f64)> = (0..nc)
                .into_par_iter()
                .map(|k| radiation_sink(gas, u.rho[k], ie[k], chi[k], lambda, dt, prm.theta_floor))
                .collect();
            for (k, (tk, removed)) in rad.iter().enumerate() {
                ie[k] -= removed;
                theta[k] = *tk;
            }
            report.rad_total += h2 * tree_sum(nc, |k| rad[k].1);
            report.rad_exterior += h2 * tree_sum(nc, |k| if coeffs.interior[k] { 0.0 } else { rad[k].1 });

            for k in 0..nc {
                u.e[k] = u.kinetic(k) + ie[k] + artificial_energy(u.rho[k], approx);
            }
            t += dt;
            report.substeps += 1;
        }

        // Make the stored temperature consistent with the stored energy.
        let (ux, uy) = vel.split_at_mut(nc);
        for k in 0..nc {
            let (tk, fix) = floor_fixup(&mut u, k, &th, theta[k]);
            theta[k] = tk;
            if let Some(fix) = fix {
                ux[k] *= fix.scale;
                uy[k] *= fix.scale;
                report.clamp_events += 1;
                report.clamp_energy += h2 * fix.injected;
            }
        }
        if window > 0.0 {
            report.mean_trace_v = vbar.iter().map(|v| [v[0] / window, v[1] / window]).collect();
            report.mean_trace_tau = taubar.iter().map(|v| v / window).collect();
        }
        report.final_trace_v = last_v;
        report.final_trace_tau = last_tau;
        if !report.min_entropy_integrand.is_finite() {
            report.min_entropy_integrand = 0.0;
        }
        let (ux, uy) = vel.split_at(nc);
        let next = FluidState {
            grid,
            rho: u.rho,
            mx: u.mx,
            my: u.my,
            theta,
            ux: ux.to_vec(),
            uy: uy.to_vec(),
            chi: chi.clone(),
        };
        Ok(FspStep { state: next, report })
    }
}

struct FloorFix {
    /// Factor applied to the cell momentum.
    scale: f64,
    /// Energy density the kinetic energy could not cover.
    injected: f64,
}

/// Recovers ϑ in cell `k`. When the internal energy sits below the floor state the
/// deficit is paid out of the cell's own kinetic energy (momentum is scaled down), so the
/// total energy is unchanged unless the kinetic energy runs out.
fn floor_fixup(u: &mut Conserved, k: usize, th: &Thermo<'_>, guess: f64) -> (f64, Option<FloorFix>) {
    let ie = u.internal(k, th.approx);
    let (tk, clamped) = th.temperature(k, u.rho[k], ie, guess);
    if !clamped {
        return (tk, None);
    }
    let rho = u.rho[k].max(0.0);
    let floor_e = th.gas.rho_e_molecular(rho, tk) + th.chi[k] * th.gas.a * tk.powi(4);
    let deficit = floor_e - ie;
    let kin = u.kinetic(k);
    let scale = if kin > deficit { ((kin - deficit) / kin).sqrt() } else { 0.0 };
    u.mx[k] *= scale;
    u.my[k] *= scale;
    u.e[k] = u.kinetic(k) + floor_e + artificial_energy(u.rho[k], th.approx);
    (tk, Some(FloorFix { scale, injected: (deficit - kin).max(0.0) }))
}

/// Convenience wrapper building a solver for a single call.
pub fn fsp_advance(
    model: &FluidModel,
    params: &FluidParams,
    state: &FluidState,
    input: &FspInput<'_>,
) -> Result<FspStep> {
    FluidSolver::new(state.grid, *model, *params)?.advance(state, input)
}

/// Energy integrals of the fluid state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluidEnergy {
    /// ∫ ½ρ|u|²
    pub kinetic: f64,
    /// ∫ ρe_η
    pub internal: f64,
    /// ∫ δρ^β/(β−1)
    pub artificial: f64,
}

impl FluidEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.internal + self.artificial
    }
}

pub fn fluid_energy(state: &FluidState, gas: &GasModel, approx: &ApproxParams) -> FluidEnergy {
    let g = &state.grid;
    FluidEnergy {
        kinetic: g.integrate_with(|k| state.kinetic_density(k)),
        internal: g.integrate_with(|k| state.internal_density(gas, k)),
        artificial: g.integrate_with(|k| artificial_energy(state.rho[k], approx)),
    }
}

/// H_{ϑ̄,η}(ρ, ϑ) = ρe_η − ϑ̄ ρs_η.
pub fn helmholtz(gas: &GasModel, rho: f64, theta: f64, chi: f64, theta_bar: f64) -> f64 {
    let t = theta.max(crate::constitutive::THETA_FLOOR);
    gas.rho_e_molecular(rho, t) + chi * gas.a * t.powi(4)
        - theta_bar * (gas.rho_s_molecular(rho, t) + chi * gas.rho_s_radiative(t))
}

/// ∂_ρ H_{ϑ̄,η}(ρ, ϑ) for ρ > 0.
pub fn helmholtz_drho(gas: &GasModel, rho: f64, theta: f64, theta_bar: f64) -> f64 {
    let de = gas.c1 * gas.gamma * rho.powf(gas.gamma - 1.0) / (gas.gamma - 1.0) + gas.cv * theta;
    let ds = gas.cv * theta.ln() - gas.c2 * rho.ln() - gas.c2;
    de - theta_bar * ds
}

/// Relative Helmholtz energy with reference temperature ϑ̄ and ρ̄ = mass / |B|:
/// ∫(½ρ|u|² + H(ρ, ϑ) − (ρ − ρ̄)∂_ρH(ρ̄, ϑ̄) − H(ρ̄, ϑ̄) + δρ^β/(β−1)).
pub fn helmholtz_ledger(state: &FluidState, gas: &GasModel, approx: &ApproxParams, theta_bar: f64) -> Result<f64> {
    let g = &state.grid;
    if let Some(k) = (0..state.len()).find(|&k| !(state.rho[k] >= 0.0) || !(state.theta[k] > 0.0)) {
        return Err(Error::Domain(format!(
            "Helmholtz ledger needs ρ ≥ 0 and ϑ > 0 (cell {k}: ρ = {}, ϑ = {})",
            state.rho[k], state.theta[k]
        )));
    }
    let rho_bar = state.mass() / g.box_area();
    if !(rho_bar > 0.0) {
        return Err(Error::Domain("Helmholtz ledger needs positive total mass".into()));
    }
    Ok(g.integrate_with(|k| {
        let chi = state.chi[k];
        let rho = state.rho[k];
        let h_ref = helmholtz(gas, rho_bar, theta_bar, chi, theta_bar);
        let slope = helmholtz_drho(gas, rho_bar, theta_bar, theta_bar);
        state.kinetic_density(k) + helmholtz(gas, rho, state.theta[k], chi, theta_bar)
            - (rho - rho_bar) * slope
            - h_ref
            + artificial_energy(rho, approx)
    }))
}

/// Weak residual of the renormalised continuity equation
/// ∫∫ b(ρ)∂tφ + b(ρ)u·∇φ + (b(ρ) − b'(ρ)ρ) div u φ  (+ boundary terms at t = 0, T)
/// for a test function φ(x, t) with gradient supplied analytically.
pub struct RenormTest<'a> {
    pub b: &'a (dyn Fn(f64) -> f64 + Sync),
    pub db: &'a (dyn Fn(f64) -> f64 + Sync),
    pub phi: &'a (dyn Fn(Vec2, f64) -> f64 + Sync),
    pub dphi_dt: &'a (dyn Fn(Vec2, f64) -> f64 + Sync),
    pub grad_phi: &'a (dyn Fn(Vec2, f64) -> Vec2 + Sync),
}

/// Evaluates the residual over frames (time, state) by midpoint in space and trapezoid in time.
/// Divergence is taken by central differences (one-sided at the walls).
pub fn renormalized_continuity_residual(frames: &[(f64, &FluidState)], test: &RenormTest<'_>) -> f64 {
    if frames.len() < 2 {
        return 0.0;
    }
    let integrand = |t: f64, s: &FluidState| -> f64 {
        let g = s.grid;
        let div = velocity_divergence(s);
        g.integrate_with(|k| {
            let x = g.center(k);
            let r = s.rho[k];
            let br = (test.b)(r);
            let gp = (test.grad_phi)(x, t);
            br * (test.dphi_dt)(x, t) + br * (s.ux[k] * gp[0] + s.uy[k] * gp[1]) + (br - (test.db)(r) * r) * div[k] * (test.phi)(x, t)
        })
    };
    let mut total = 0.0;
    for w in frames.windows(2) {
        let (t0, s0) = w[0];
        let (t1, s1) = w[1];
        total += 0.5 * (t1 - t0) * (integrand(t0, s0) + integrand(t1, s1));
    }
    let (ta, sa) = frames[0];
    let (tb, sb) = frames[frames.len() - 1];
    let boundary = |t: f64, s: &FluidState| s.grid.integrate_with(|k| (test.b)(s.rho[k]) * (test.phi)(s.grid.center(k), t));
    total + boundary(ta, sa) - boundary(tb, sb)
}

/// Cell divergence of the stored velocity (central differences, wall value 0).
pub fn velocity_divergence(s: &FluidState) -> Vec<f64> {
    let g = s.grid;
    let n = g.n;
    let h = g.h();
    (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let xp = if i + 1 < n { s.ux[k + 1] } else { -s.ux[k] };
            let xm = if i > 0 { s.ux[k - 1] } else { -s.ux[k] };
            let yp = if j + 1 < n { s.uy[k + n] } else { -s.uy[k] };
            let ym = if j > 0 { s.uy[k - n] } else { -s.uy[k] };
            (xp - xm + yp - ym) / (2.0 * h)
        })
        .collect()
}
