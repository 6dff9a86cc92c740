//! Manufactured solutions with hand-derived source terms, and the convergence studies
//! built on them.
//!
//! * A — heat diffusion at rest on the box with insulated walls;
//! * B — compressible swirl with exponentially decaying amplitude, run through the full
//!   fluid step;
//! * C — coupled breathing mode (uniform radial displacement with matched interior
//!   velocity), evaluated through the weak entropy and energy residuals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::constitutive::{GasModel, Mat2, TransportModel};
use crate::diagnostics::weak::{
    build_test_pair, energy_residual, entropy_inequality_residual, BlendLayers, FluidPoint, ShellPoint, SpaceTimeFields,
    TestField, WeakModel, WeakResidual,
};
use crate::error::{Error, Result};
use crate::extension::CoefficientFields;
use crate::fluid::heat::conduction_step;
use crate::fluid::{FluidModel, FluidParams, FluidSolver, FluidState, FspInput, InterfaceStencil};
use crate::geometry::{Chart, ReferenceGeometry, Vec2};
use crate::grid::Grid;
use crate::numerics::loglog_slope;
use crate::structure::ShellParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManufacturedCase {
    A,
    B,
    C,
}

impl FromStr for ManufacturedCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ManufacturedCase::A),
            "B" | "b" => Ok(ManufacturedCase::B),
            "C" | "c" => Ok(ManufacturedCase::C),
            other => Err(Error::Validation(format!("unknown manufactured case '{other}' (expected A, B or C)"))),
        }
    }
}

impl fmt::Display for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ManufacturedCase::A => "A",
            ManufacturedCase::B => "B",
            ManufacturedCase::C => "C",
        };
        f.write_str(s)
    }
}

/// Base resolutions of a study with `levels` levels: 32, 64, 128, …
pub fn default_resolutions(levels: usize) -> Vec<usize> {
    (0..levels).map(|i| 32usize << i).collect()
}

// ---------------------------------------------------------------------------------------
// Case A: heat diffusion at rest
// ---------------------------------------------------------------------------------------

/// ϑ = Θ₀ + A e^{−t} cos(πx/L) cos(πy/L) at fixed density ρ₀ and zero velocity; the
/// cosines satisfy the insulated-wall condition on B = [−L, L]².
#[derive(Debug, Clone, Copy)]
pub struct HeatDiffusionCase {
    pub half_width: f64,
    pub rho0: f64,
    pub theta0: f64,
    pub amplitude: f64,
    pub horizon: f64,
    /// Time step as a multiple of h².
    pub dt_over_h2: f64,
    pub gas: GasModel,
    pub transport: TransportModel,
}

impl Default for HeatDiffusionCase {
    fn default() -> Self {
        HeatDiffusionCase {
            half_width: 2.0,
            rho0: 1.0,
            theta0: 1.0,
            amplitude: 0.3,
            horizon: 0.05,
            dt_over_h2: 0.5,
            gas: GasModel::default(),
            transport: TransportModel::default(),
        }
    }
}

impl HeatDiffusionCase {
    fn k(&self) -> f64 {
        PI / self.half_width
    }

    pub fn theta(&self, x: Vec2, t: f64) -> f64 {
        let k = self.k();
        self.theta0 + self.amplitude * (-t).exp() * (k * x[0]).cos() * (k * x[1]).cos()
    }

    /// Q = c(ϑ)ϑ_t − κ'(ϑ)|∇ϑ|² − κ(ϑ)Δϑ with c = c_v ρ₀ + 4aϑ³.
    pub fn source(&self, x: Vec2, t: f64) -> f64 {
        let k = self.k();
        let g = self.amplitude * (-t).exp();
        let (cx, sx) = ((k * x[0]).cos(), (k * x[0]).sin());
        let (cy, sy) = ((k * x[1]).cos(), (k * x[1]).sin());
        let th = self.theta0 + g * cx * cy;
        let th_t = -g * cx * cy;
        let grad2 = (g * k).powi(2) * ((sx * cy).powi(2) + (cx * sy).powi(2));
        let lap = -2.0 * k * k * g * cx * cy;
        let cap = self.gas.cv * self.rho0 + 4.0 * self.gas.a * th.powi(3);
        cap * th_t - self.transport.kappa_prime(th) * grad2 - self.transport.kappa(th) * lap
    }

    /// Relative L² error of the computed temperature at T on an n×n grid.
    pub fn run(&self, n: usize) -> Result<f64> {
        let grid = Grid::new(n, self.half_width);
        let nc = grid.len();
        let h = grid.h();
        let steps = (self.horizon / (self.dt_over_h2 * h * h)).ceil().max(1.0) as usize;
        let dt = self.horizon / steps as f64;
        let rho = vec![self.rho0; nc];
        let chi = vec![1.0; nc];
        let mut theta: Vec<f64> = (0..nc).map(|k| self.theta(grid.center(k), 0.0)).collect();
        let mut rho_e: Vec<f64> = theta.iter().map(|&t| self.gas.rho_e(self.rho0, t)).collect::<Result<_>>()?;
        let tr = self.transport;
        for s in 0..steps {
            let t1 = (s + 1) as f64 * dt;
            let q: Vec<f64> = (0..nc).map(|k| self.source(grid.center(k), t1)).collect();
            let out = conduction_step(&grid, &self.gas, &rho, &rho_e, &chi, &|_, th| tr.kappa(th), &theta, &q, dt, 1e-12, 1e-13, 12)?;
            rho_e = out.rho_e;
            theta = out.theta;
        }
        let exact: Vec<f64> = (0..nc).map(|k| self.theta(grid.center(k), self.horizon)).collect();
        Ok(relative_l2(&theta, &exact))
    }
}

// ---------------------------------------------------------------------------------------
// Case B: compressible swirl
// ---------------------------------------------------------------------------------------

/// ρ = ρ₀ + b(1 − r²/R²)⁴, u = A₀e^{−t} g(r)(−y, x) with g = (1 − r²/R²)⁴, ϑ ≡ Θ₀ (all
/// profiles vanish for r ≥ R). The swirl is divergence free and tangent to the density
/// level sets, so continuity holds without a source.
#[derive(Debug, Clone, Copy)]
pub struct SwirlCase {
    pub half_width: f64,
    pub support: f64,
    pub rho0: f64,
    pub rho_bump: f64,
    pub theta0: f64,
    pub amplitude: f64,
    pub horizon: f64,
    pub model: FluidModel,
}

impl Default for SwirlCase {
    fn default() -> Self {
        SwirlCase {
            half_width: 2.0,
            support: 2.0,
            rho0: 1.0,
            rho_bump: 0.5,
            theta0: 1.0,
            amplitude: 0.5,
            horizon: 0.1,
            model: FluidModel::default(),
        }
    }
}

/// Values of the radial profile (1 − r²/R²)⁴ needed below: (f, f'/r, f'' + 3f'/r).
fn quartic_profile(r: f64, big_r: f64) -> (f64, f64, f64) {
    let r2 = big_r * big_r;
    let q = 1.0 - r * r / r2;
    if q <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = q.powi(4);
    let fp_over_r = -8.0 / r2 * q.powi(3);
    let fpp = -8.0 / r2 * q.powi(3) + 48.0 * r * r / (r2 * r2) * q * q;
    (f, fp_over_r, fpp + 3.0 * fp_over_r)
}

impl SwirlCase {
    fn amp(&self, t: f64) -> f64 {
        self.amplitude * (-t).exp()
    }

    pub fn rho(&self, x: Vec2) -> f64 {
        let r = x[0].hypot(x[1]);
        self.rho0 + self.rho_bump * quartic_profile(r, self.support).0
    }

    pub fn velocity(&self, x: Vec2, t: f64) -> Vec2 {
        let r = x[0].hypot(x[1]);
        let w = self.amp(t) * quartic_profile(r, self.support).0;
        [-w * x[1], w * x[0]]
    }

    /// Hand-derived source rates [ρ, m_x, m_y, E] for the conservative equations.
    pub fn source(&self, x: Vec2, t: f64) -> [f64; 4] {
        let gas = &self.model.gas;
        let ap = &self.model.approx;
        let th = self.theta0;
        let r = x[0].hypot(x[1]);
        let (g, gp_r, lap_g) = quartic_profile(r, self.support);
        let a = self.amp(t);
        let omega = a * g;
        // ω'/r and ω'' + 3ω'/r
        let om_p_r = a * gp_r;
        let lap_om = a * lap_g;
        let rho = self.rho0 + self.rho_bump * g;
        let rho_p_r = self.rho_bump * gp_r;
        let u = [-omega * x[1], omega * x[0]];
        let u2 = omega * omega * r * r;
        let mu = self.model.transport.mu(th);
        // ∂p/∂ρ along the radial profile, including the artificial pressure.
        let dp = gas.c1 * gas.gamma * rho.powf(gas.gamma - 1.0) + gas.c2 * th + ap.delta * ap.beta * rho.powf(ap.beta - 1.0);
        let grad_p = [dp * rho_p_r * x[0], dp * rho_p_r * x[1]];
        // ρu_t + ρ(u·∇)u + ∇p − μΔu with u_t = −u, (u·∇)u = −ω²x, Δu = (ω'' + 3ω'/r)(−y, x).
        let fx = -rho * u[0] - rho * omega * omega * x[0] + grad_p[0] - mu * lap_om * (-x[1]);
        let fy = -rho * u[1] - rho * omega * omega * x[1] + grad_p[1] - mu * lap_om * x[0];
        // ∂tE − div(Su) + λϑ⁵, with ∂tE = −ρ|u|², div(Su) = μ u·Δu + μ ω'² r².
        let div_su = mu * lap_om * omega * r * r + mu * (om_p_r * r).powi(2) * r * r;
        let e = -rho * u2 - div_su + ap.lambda() * th.powi(5);
        [0.0, fx, fy, e]
    }

    /// Relative L² errors (velocity, density) at T on an n×n grid.
    pub fn run(&self, n: usize) -> Result<(f64, f64)> {
        let grid = Grid::new(n, self.half_width);
        let nc = grid.len();
        let rho: Vec<f64> = (0..nc).map(|k| self.rho(grid.center(k))).collect();
        let (mx, my): (Vec<f64>, Vec<f64>) = (0..nc)
            .map(|k| {
                let u = self.velocity(grid.center(k), 0.0);
                (rho[k] * u[0], rho[k] * u[1])
            })
            .unzip();
        let state = FluidState::new(grid, rho.clone(), mx, my, vec![self.theta0; nc]);
        let params = FluidParams { pcg_tol: 1e-12, ..FluidParams::default() };
        let solver = FluidSolver::new(grid, self.model, params)?;
        let coeffs = CoefficientFields::uniform(&grid);
        let stencil = InterfaceStencil::empty(grid);
        let src = |x: Vec2, t: f64| self.source(x, t);
        let step = solver.advance(
            &state,
            &FspInput {
                coeffs: &coeffs,
                stencil: &stencil,
                shell_v: &[],
                shell_theta: &[],
                time: 0.0,
                duration: Some(self.horizon),
                source: Some(&src),
            },
        )?;
        let s = step.state;
        let mut ex = Vec::with_capacity(2 * nc);
        let mut got = Vec::with_capacity(2 * nc);
        for k in 0..nc {
            let u = self.velocity(grid.center(k), self.horizon);
            ex.extend_from_slice(&u);
            got.push(s.ux[k]);
            got.push(s.uy[k]);
        }
        Ok((relative_l2(&got, &ex), relative_l2(&s.rho, &rho)))
    }
}

// ---------------------------------------------------------------------------------------
// Case C: coupled breathing mode
// ---------------------------------------------------------------------------------------

/// Circle of radius R₀ with w(y, t) = ε sin t, fluid u = (Ṙ/R)x in the disk of radius
/// R = R₀ + w, density ρ₀(R₀/R)² (exact continuity), and a common temperature
/// ϑ = θ = Θ₀ + ε_θ sin t on both sides of the interface.
#[derive(Debug, Clone, Copy)]
pub struct BreathingCase {
    pub r0: f64,
    pub eps: f64,
    pub rho0: f64,
    pub theta0: f64,
    pub theta_amp: f64,
    pub horizon: f64,
    /// Tube bounds of the reference geometry.
    pub tube: (f64, f64),
    pub half_width: f64,
    pub model: WeakModel,
}

impl Default for BreathingCase {
    fn default() -> Self {
        BreathingCase {
            r0: 1.0,
            eps: 0.1,
            rho0: 1.0,
            theta0: 1.0,
            theta_amp: 0.2,
            horizon: 0.5,
            tube: (-0.5, 0.5),
            half_width: 2.0,
            model: WeakModel { gas: GasModel::default(), transport: TransportModel::default(), shell: ShellParams::default() },
        }
    }
}

impl BreathingCase {
    /// The equilibrium member of the family (ε = ε_θ = 0).
    pub fn static_equilibrium() -> Self {
        BreathingCase { eps: 0.0, theta_amp: 0.0, ..Self::default() }
    }

    pub fn radius(&self, t: f64) -> f64 {
        self.r0 + self.eps * t.sin()
    }

    pub fn radius_rate(&self, t: f64) -> f64 {
        self.eps * t.cos()
    }

    pub fn radius_accel(&self, t: f64) -> f64 {
        -self.eps * t.sin()
    }

    pub fn density(&self, t: f64) -> f64 {
        self.rho0 * (self.r0 / self.radius(t)).powi(2)
    }

    pub fn temperature(&self, t: f64) -> f64 {
        self.theta0 + self.theta_amp * t.sin()
    }

    pub fn temperature_rate(&self, t: f64) -> f64 {
        self.theta_amp * t.cos()
    }

    /// Expansion rate c = Ṙ/R; ∇u = c I.
    fn rate(&self, t: f64) -> f64 {
        self.radius_rate(t) / self.radius(t)
    }

    fn mass(&self) -> f64 {
        PI * self.rho0 * self.r0 * self.r0
    }

    pub fn geometry(&self, n_gamma: usize) -> Result<ReferenceGeometry> {
        ReferenceGeometry::new(Chart::Circle { radius: self.r0 }, self.tube.0, self.tube.1, self.half_width, n_gamma)
    }

    /// Volume entropy source ς = ∂t(ρs) + div(ρsu) − σ, with
    /// ∂t(ρs) + div(ρsu) = ρc_vϑ_t/ϑ + 2c₂ρc + 4aϑ²ϑ_t + (8/3)aϑ³c and σ = ((4/3)μ + 4ζ)c²/ϑ.
    pub fn volume_entropy_source(&self, t: f64) -> f64 {
        let g = &self.model.gas;
        let tr = &self.model.transport;
        let rho = self.density(t);
        let th = self.temperature(t);
        let th_t = self.temperature_rate(t);
        let c = self.rate(t);
        let transport = rho * g.cv * th_t / th + 2.0 * g.c2 * rho * c + 4.0 * g.a * th * th * th_t + 8.0 / 3.0 * g.a * th.powi(3) * c;
        let sigma = (4.0 / 3.0 * tr.mu(th) + 4.0 * tr.zeta(th)) * c * c / th;
        transport - sigma
    }

    /// Shell entropy source χ = θ_t − θ_yy − w_tyy = θ_t (uniform fields, no interface flux
    /// since ∇ϑ = 0).
    pub fn shell_source(&self, t: f64) -> f64 {
        self.temperature_rate(t)
    }

    /// Power the forcing must supply, dE/dt of
    /// E = mṘ²/4 + c₁πR²ρ^γ/(γ−1) + c_v mϑ + aπR²ϑ⁴ + ½Ṙ² + ½θ² (m = πρR² is conserved).
    pub fn source_power(&self, t: f64) -> f64 {
        let g = &self.model.gas;
        let m = self.mass();
        let r = self.radius(t);
        let rd = self.radius_rate(t);
        let rdd = self.radius_accel(t);
        let rho = self.density(t);
        let th = self.temperature(t);
        let th_t = self.temperature_rate(t);
        let kinetic = 0.5 * m * rd * rdd;
        let cold = -2.0 * g.c1 * PI * r * r * rho.powf(g.gamma) * rd / r;
        let thermal = g.cv * m * th_t;
        let radiation = g.a * PI * (2.0 * r * rd * th.powi(4) + 4.0 * r * r * th.powi(3) * th_t);
        let shell = rd * rdd + th * th_t;
        kinetic + cold + thermal + radiation + shell
    }

    /// Largest interface mismatch |u·n − w_t| + |u·τ| + |ϑ − θ| over the nodes and times.
    pub fn compatibility_defect(&self, fields: &BreathingFields<'_>) -> f64 {
        let geo_chart = Chart::Circle { radius: self.r0 };
        let mut worst = 0.0f64;
        for &t in &fields.times {
            for j in 0..fields.n_gamma {
                let y = j as f64 / fields.n_gamma as f64;
                let n = geo_chart.normal(y);
                let p = geo_chart.point(y);
                let s = fields.shell(y, t);
                let x = [p[0] + s.w * n[0], p[1] + s.w * n[1]];
                let f = fields.fluid(x, t);
                let un = f.u[0] * n[0] + f.u[1] * n[1];
                let ut = -f.u[0] * n[1] + f.u[1] * n[0];
                worst = worst.max((un - s.w_t).abs() + ut.abs() + (f.theta - s.theta).abs());
            }
        }
        worst
    }

    pub fn fields(&self, n: usize) -> BreathingFields<'_> {
        let nt = (n / 8).max(2);
        BreathingFields {
            case: self,
            radial: (n / 4).max(2),
            angular: n.max(8),
            n_gamma: n.max(8),
            times: (0..=nt).map(|i| self.horizon * i as f64 / nt as f64).collect(),
            override_theta: None,
        }
    }
}

/// Space-time view of a [`BreathingCase`] at one quadrature resolution.
pub struct BreathingFields<'a> {
    pub case: &'a BreathingCase,
    pub radial: usize,
    pub angular: usize,
    pub n_gamma: usize,
    pub times: Vec<f64>,
    /// Replaces the shell temperature by a constant (used to build incompatible data).
    pub override_theta: Option<f64>,
}

impl SpaceTimeFields for BreathingFields<'_> {
    fn fluid(&self, x: Vec2, t: f64) -> FluidPoint {
        let c = self.case.rate(t);
        let grad_u: Mat2 = [[c, 0.0], [0.0, c]];
        FluidPoint {
            rho: self.case.density(t),
            u: [c * x[0], c * x[1]],
            theta: self.case.temperature(t),
            grad_u,
            grad_theta: [0.0, 0.0],
        }
    }

    fn shell(&self, _y: f64, t: f64) -> ShellPoint {
        ShellPoint {
            w: self.case.eps * t.sin(),
            w_t: self.case.radius_rate(t),
            theta: self.override_theta.unwrap_or_else(|| self.case.temperature(t)),
            ..ShellPoint::default()
        }
    }

    /// Polar midpoint rule on the disk of radius R(t).
    fn domain_quadrature(&self, t: f64) -> Vec<(Vec2, f64)> {
        let r = self.case.radius(t);
        let dr = r / self.radial as f64;
        let da = 2.0 * PI / self.angular as f64;
        let mut q = Vec::with_capacity(self.radial * self.angular);
        for i in 0..self.radial {
            let ri = (i as f64 + 0.5) * dr;
            for j in 0..self.angular {
                let a = (j as f64 + 0.5) * da;
                q.push(([ri * a.cos(), ri * a.sin()], ri * dr * da));
            }
        }
        q
    }

    fn gamma_nodes(&self) -> usize {
        self.n_gamma
    }

    fn time_nodes(&self) -> Vec<f64> {
        self.times.clone()
    }

    fn entropy_source(&self, _x: Vec2, t: f64) -> f64 {
        self.case.volume_entropy_source(t)
    }

    fn shell_entropy_source(&self, _y: f64, t: f64) -> f64 {
        self.case.shell_source(t)
    }

    fn energy_source_power(&self, t: f64) -> f64 {
        self.case.source_power(t)
    }
}

/// Entropy and energy residuals of a breathing case at quadrature resolution `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub entropy: WeakResidual,
    pub energy: WeakResidual,
}

/// Scalar test field and its shell companion used for the coupled entropy residual.
fn entropy_test_phi(x: Vec2, t: f64) -> f64 {
    1.0 + 0.3 * x[0] - 0.2 * x[1] * x[1] + 0.1 * (x[0] * x[1]) * t.cos()
}

fn entropy_test_psi(y: f64, t: f64) -> f64 {
    1.0 + 0.25 * (2.0 * PI * y).cos() * (1.0 + 0.5 * t)
}

/// Evaluates both coupled weak forms on the closed-form fields at resolution `n`.
pub fn breathing_identity_check(case: &BreathingCase, n: usize) -> Result<IdentityResiduals> {
    let fields = case.fields(n);
    identity_residuals(case, &fields)
}

pub fn identity_residuals(case: &BreathingCase, fields: &BreathingFields<'_>) -> Result<IdentityResiduals> {
    let defect = case.compatibility_defect(fields);
    if defect > 1e-10 {
        return Err(Error::Validation(format!(
            "manufactured traces are not coupled-compatible (interface mismatch {defect:.3e})"
        )));
    }
    let geometry = case.geometry(fields.n_gamma)?;
    let eps = case.eps;
    let w = move |_y: f64, t: f64| eps * t.sin();
    let (a, b) = case.tube;
    let layers = BlendLayers { a1: 0.8 * a, a2: 0.4 * a, b1: 0.4 * b, b2: 0.8 * b };
    let pair = build_test_pair(TestField::Scalar(&entropy_test_phi), &entropy_test_psi, &geometry, &w, layers, &fields.times)?;
    let entropy = entropy_inequality_residual(fields, &case.model, &pair)?;
    let energy = energy_residual(fields, &case.model)?;
    Ok(IdentityResiduals { entropy, energy })
}

// ---------------------------------------------------------------------------------------
// Convergence tables
// ---------------------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    /// One value per column of the table.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub case: ManufacturedCase,
    pub columns: Vec<&'static str>,
    pub rows: Vec<ConvergenceRow>,
    /// Observed order per column (log-log regression against h).
    pub orders: Vec<f64>,
    /// Smallest ratio between successive rows per column.
    pub min_ratios: Vec<f64>,
}

impl ConvergenceTable {
    fn finish(case: ManufacturedCase, columns: Vec<&'static str>, rows: Vec<ConvergenceRow>) -> Self {
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let orders = (0..columns.len())
            .map(|c| loglog_slope(&hs, &rows.iter().map(|r| r.values[c].abs()).collect::<Vec<_>>()))
            .collect();
        let min_ratios = (0..columns.len())
            .map(|c| {
                rows.windows(2)
                    .map(|w| w[0].values[c].abs() / w[1].values[c].abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        ConvergenceTable { case, columns, rows, orders, min_ratios }
    }

    pub fn order(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| *c == column).map(|i| self.orders[i])
    }

    pub fn min_ratio(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| *c == column).map(|i| self.min_ratios[i])
    }

    /// `n,h,<columns…>` rows followed by an `order` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h");
        for c in &self.columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("{},{:e}", r.n, r.h));
            for v in &r.values {
                s.push_str(&format!(",{v:e}"));
            }
            s.push('\n');
        }
        s.push_str("order,");
        for o in &self.orders {
            s.push_str(&format!(",{o:.6}"));
        }
        s.push('\n');
        s
    }
}

/// Runs one manufactured case over the given resolutions (at least two).
pub fn residual_convergence(case: ManufacturedCase, resolutions: &[usize]) -> Result<ConvergenceTable> {
    if resolutions.len() < 2 {
        return Err(Error::Validation("a convergence study needs at least two resolutions".into()));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("resolutions must be strictly increasing".into()));
    }
    match case {
        ManufacturedCase::A => {
            let c = HeatDiffusionCase::default();
            let rows = resolutions
                .iter()
                .map(|&n| Ok(ConvergenceRow { n, h: 2.0 * c.half_width / n as f64, values: vec![c.run(n)?] }))
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceTable::finish(case, vec!["theta_l2"], rows))
        }
        ManufacturedCase::B => {
            let c = SwirlCase::default();
            let rows = resolutions
                .iter()
                .map(|&n| {
                    let (u, rho) = c.run(n)?;
                    Ok(ConvergenceRow { n, h: 2.0 * c.half_width / n as f64, values: vec![u, rho] })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceTable::finish(case, vec!["velocity_l2", "density_l2"], rows))
        }
        ManufacturedCase::C => {
            let c = BreathingCase::default();
            let rows = resolutions
                .par_iter()
                .map(|&n| {
                    let r = breathing_identity_check(&c, n)?;
                    Ok(ConvergenceRow { n, h: 1.0 / n as f64, values: vec![r.entropy.residual.abs(), r.energy.residual.abs()] })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceTable::finish(case, vec!["entropy_residual", "energy_residual"], rows))
        }
    }
}

/// Relative discrete L² distance ‖a − b‖/‖b‖ (absolute when b vanishes).
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}
