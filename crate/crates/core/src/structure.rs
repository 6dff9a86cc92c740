//! Structure sub-problem: the linear thermoelastic shell on the flat torus Γ = ℝ/ℤ,
//! Fourier–Galerkin in space, implicit midpoint in time, with δ/Δt relaxation toward
//! the lagged fluid traces.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::DisplacementSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellParams {
    /// Viscoelastic damping α₁.
    pub alpha1: f64,
    /// Rotational inertia α₂.
    pub alpha2: f64,
    pub delta: f64,
    /// Window length Δt.
    pub dt: f64,
    /// Highest retained Fourier mode M.
    pub modes: usize,
    pub substeps: usize,
    /// Bending stiffness multiplier (1 in the normalised model).
    pub stiffness: f64,
    /// When false the temperature equation is frozen (θ̂ stays at its initial value) and
    /// decoupled from the plate equation.
    pub thermal_coupling: bool,
}

impl Default for ShellParams {
    fn default() -> Self {
        ShellParams {
            alpha1: 0.1,
            alpha2: 0.0,
            delta: 0.1,
            dt: 1.0 / 32.0,
            modes: 32,
            substeps: 8,
            stiffness: 1.0,
            thermal_coupling: true,
        }
    }
}

impl ShellParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 >= 0.0 && self.alpha2 >= 0.0) {
            return Err(Error::Validation("shell.alpha1 and shell.alpha2 must be non-negative".into()));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Error::Validation(format!("delta = {} must lie in [0, 1)", self.delta)));
        }
        if !(self.dt > 0.0) || self.substeps == 0 {
            return Err(Error::Validation("shell window length and substep count must be positive".into()));
        }
        if !(self.stiffness > 0.0) {
            return Err(Error::Validation("shell.stiffness must be positive".into()));
        }
        Ok(())
    }

    /// ξ_m = (2π m)².
    #[inline]
    pub fn xi(m: usize) -> f64 {
        let k = TAU * m as f64;
        k * k
    }

    /// Parseval weight of mode m for real fields (m and −m combined).
    #[inline]
    pub fn parseval_weight(m: usize) -> f64 {
        if m == 0 { 1.0 } else { 2.0 }
    }
}

/// Fourier coefficients of displacement, velocity and temperature for m = 0..=M
/// (negative modes follow by conjugate symmetry).
#[derive(Debug, Clone, PartialEq)]
pub struct ShellState {
    pub w: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub theta: Vec<Complex64>,
}

/// f̂_m = (1/N) Σ_j f_j e^{−2πi m y_j} for m = 0..=M.
pub fn project_modes(nodes: &[f64], modes: usize) -> Vec<Complex64> {
    let n = nodes.len();
    assert!(n > 2 * modes, "need more than 2M nodes to resolve M modes");
    (0..=modes)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, f) in nodes.iter().enumerate() {
                acc += Complex64::from_polar(*f, -TAU * ((m * j) % n) as f64 / n as f64);
            }
            let c = acc / n as f64;
            if m == 0 { Complex64::new(c.re, 0.0) } else { c }
        })
        .collect()
}

/// Real samples at y_j = j/N of the field with coefficients `coeffs`.
pub fn synthesize(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let mut v = coeffs.first().map_or(0.0, |c| c.re);
            for (m, c) in coeffs.iter().enumerate().skip(1) {
                v += 2.0 * (c * Complex64::from_polar(1.0, TAU * ((m * j) % n) as f64 / n as f64)).re;
            }
            v
        })
        .collect()
}

/// Σ_m p_m c_m |f̂_m|² for per-mode factor `c_m`.
fn weighted_norm(coeffs: &[Complex64], factor: impl Fn(usize) -> f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| ShellParams::parseval_weight(m) * factor(m) * c.norm_sqr())
        .sum()
}

impl ShellState {
    pub fn zero(modes: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); modes + 1];
        ShellState { w: z.clone(), v: z.clone(), theta: z }
    }

    pub fn from_nodes(w: &[f64], v: &[f64], theta: &[f64], modes: usize) -> Self {
        ShellState { w: project_modes(w, modes), v: project_modes(v, modes), theta: project_modes(theta, modes) }
    }

    pub fn modes(&self) -> usize {
        self.w.len() - 1
    }

    pub fn w_nodes(&self, n: usize) -> Vec<f64> {
        synthesize(&self.w, n)
    }

    pub fn v_nodes(&self, n: usize) -> Vec<f64> {
        synthesize(&self.v, n)
    }

    pub fn theta_nodes(&self, n: usize) -> Vec<f64> {
        synthesize(&self.theta, n)
    }

    /// Displacement samples (with velocities) on `n` equispaced nodes.
    pub fn displacement(&self, n: usize) -> DisplacementSample {
        DisplacementSample::with_velocities(self.w_nodes(n), self.v_nodes(n))
    }

    /// Largest imaginary part of the synthesised fields (realness check).
    pub fn imaginary_residual(&self) -> f64 {
        [&self.w, &self.v, &self.theta].iter().map(|c| c[0].im.abs()).fold(0.0, f64::max)
    }
}

/// Energy components of the shell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShellEnergy {
    /// (1−δ)/2 ‖∂t w‖²
    pub kinetic: f64,
    /// K/2 ‖Δw‖²
    pub bending: f64,
    /// α₂/2 ‖∇∂t w‖²
    pub rotational: f64,
    /// (1−δ)/2 ‖θ‖²
    pub thermal: f64,
}

impl ShellEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.bending + self.rotational + self.thermal
    }
}

pub fn shell_energy(state: &ShellState, params: &ShellParams) -> ShellEnergy {
    let d = params.delta;
    ShellEnergy {
        kinetic: 0.5 * (1.0 - d) * weighted_norm(&state.v, |_| 1.0),
        bending: 0.5 * params.stiffness * weighted_norm(&state.w, |m| ShellParams::xi(m).powi(2)),
        rotational: 0.5 * params.alpha2 * weighted_norm(&state.v, ShellParams::xi),
        thermal: 0.5 * (1.0 - d) * weighted_norm(&state.theta, |_| 1.0),
    }
}

/// Dissipation and penalty integrals accumulated over one window (midpoint quadrature).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SspReport {
    /// α₁ ∫‖∇∂t w‖²
    pub viscous_dissipation: f64,
    /// ∫‖∇θ‖²
    pub heat_dissipation: f64,
    /// (δ/2Δt) ∫‖∂t w − g‖²
    pub penalty_v_cross: f64,
    /// (δ/2Δt) ∫‖∂t w‖²
    pub penalty_v_self: f64,
    /// (δ/2Δt) ∫‖g‖² (energy supplied by the lagged velocity)
    pub input_v: f64,
    /// (δ/2Δt) ∫‖θ − h‖²
    pub penalty_t_cross: f64,
    /// (δ/2Δt) ∫‖θ‖²
    pub penalty_t_self: f64,
    /// (δ/2Δt) ∫‖h‖²
    pub input_t: f64,
    /// Window mean of the midpoint velocity modes.
    pub mean_v: Vec<Complex64>,
    /// Window mean of the midpoint temperature modes.
    pub mean_theta: Vec<Complex64>,
}

impl SspReport {
    pub fn dissipation(&self) -> f64 {
        self.viscous_dissipation + self.heat_dissipation
    }
    pub fn penalties(&self) -> f64 {
        self.penalty_v_cross + self.penalty_v_self + self.penalty_t_cross + self.penalty_t_self
    }
    pub fn inputs(&self) -> f64 {
        self.input_v + self.input_t
    }
}

#[derive(Debug, Clone)]
pub struct SspStep {
    pub state: ShellState,
    pub report: SspReport,
}

type Mat3 = [[f64; 3]; 3];

fn solve3(a: &Mat3, b: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = if j == c { b[i] } else { Complex64::new(a[i][j], 0.0) };
            }
        }
        let d = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        *xc = d / det;
    }
    Some(x)
}

struct ModeOutcome {
    w: Complex64,
    v: Complex64,
    theta: Complex64,
    mean_v: Complex64,
    mean_theta: Complex64,
    // Per-mode contributions already multiplied by Parseval weights and time step.
    visc: f64,
    heat: f64,
    pvc: f64,
    pvs: f64,
    iv: f64,
    ptc: f64,
    pts: f64,
    it: f64,
}

fn advance_mode(
    m: usize,
    y0: (Complex64, Complex64, Complex64),
    g: Complex64,
    hh: Complex64,
    p: &ShellParams,
) -> Option<ModeOutcome> {
    let xi = ShellParams::xi(m);
    let pw = ShellParams::parseval_weight(m);
    let d = p.delta;
    let rate = d / p.dt;
    let mv = (1.0 - d) + p.alpha2 * xi;
    let mt = 1.0 - d;
    let couple = if p.thermal_coupling { 1.0 } else { 0.0 };
    // y' = A y + f, y = (w, v, θ).
    let a: Mat3 = [
        [0.0, 1.0, 0.0],
        [-p.stiffness * xi * xi / mv, -(rate + p.alpha1 * xi) / mv, couple * xi / mv],
        [0.0, -couple * xi / mt, -couple * (rate + xi) / mt],
    ];
    let f = [Complex64::new(0.0, 0.0), rate * g / mv, couple * rate * hh / mt];
    let h = p.dt / p.substeps as f64;
    let mut lhs = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            lhs[i][j] = if i == j { 1.0 } else { 0.0 } - 0.5 * h * a[i][j];
        }
    }
    let (mut w, mut v, mut th) = y0;
    let mut out = ModeOutcome {
        w,
        v,
        theta: th,
        mean_v: Complex64::new(0.0, 0.0),
        mean_theta: Complex64::new(0.0, 0.0),
        visc: 0.0,
        heat: 0.0,
        pvc: 0.0,
        pvs: 0.0,
        iv: 0.0,
        ptc: 0.0,
        pts: 0.0,
        it: 0.0,
    };
    for _ in 0..p.substeps {
        let y = [w, v, th];
        let mut rhs = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            let mut acc = y[i];
            for j in 0..3 {
                acc += 0.5 * h * a[i][j] * y[j];
            }
            rhs[i] = acc + h * f[i];
        }
        let y1 = solve3(&lhs, rhs)?;
        let vm = 0.5 * (v + y1[1]);
        let tm = 0.5 * (th + y1[2]);
        out.mean_v += vm;
        out.mean_theta += tm;
        out.visc += h * pw * p.alpha1 * xi * vm.norm_sqr();
        out.pvc += h * pw * 0.5 * rate * (vm - g).norm_sqr();
        out.pvs += h * pw * 0.5 * rate * vm.norm_sqr();
        out.iv += h * pw * 0.5 * rate * g.norm_sqr();
        if p.thermal_coupling {
            out.heat += h * pw * xi * tm.norm_sqr();
            out.ptc += h * pw * 0.5 * rate * (tm - hh).norm_sqr();
            out.pts += h * pw * 0.5 * rate * tm.norm_sqr();
            out.it += h * pw * 0.5 * rate * hh.norm_sqr();
        }
        w = y1[0];
        v = y1[1];
        th = y1[2];
    }
    out.w = w;
    out.v = v;
    out.theta = th;
    out.mean_v /= p.substeps as f64;
    out.mean_theta /= p.substeps as f64;
    Some(out)
}

/// Advances the shell over one window given the lagged (window-constant) Γ-samples of
/// the fluid velocity's normal component and of the fluid temperature.
pub fn ssp_advance(state: &ShellState, lagged_v: &[f64], lagged_tau: &[f64], params: &ShellParams) -> Result<SspStep> {
    params.validate()?;
    let modes = state.modes();
    if lagged_v.len() != lagged_tau.len() {
        return Err(Error::Validation("lagged traces must share the Γ grid".into()));
    }
    if lagged_v.len() <= 2 * modes {
        return Err(Error::Validation(format!(
            "{} Γ-nodes cannot resolve {modes} shell modes",
            lagged_v.len()
        )));
    }
    let g = project_modes(lagged_v, modes);
    let hh = project_modes(lagged_tau, modes);
    let outcomes: Vec<Option<ModeOutcome>> = (0..=modes)
        .into_par_iter()
        .map(|m| advance_mode(m, (state.w[m], state.v[m], state.theta[m]), g[m], hh[m], params))
        .collect();
    let mut next = ShellState::zero(modes);
    let mut report = SspReport {
        mean_v: vec![Complex64::new(0.0, 0.0); modes + 1],
        mean_theta: vec![Complex64::new(0.0, 0.0); modes + 1],
        ..Default::default()
    };
    for (m, o) in outcomes.into_iter().enumerate() {
        let o = o.ok_or_else(|| Error::Solver(format!("singular shell mode matrix at m = {m}")))?;
        next.w[m] = o.w;
        next.v[m] = o.v;
        next.theta[m] = o.theta;
        report.mean_v[m] = o.mean_v;
        report.mean_theta[m] = o.mean_theta;
        report.viscous_dissipation += o.visc;
        report.heat_dissipation += o.heat;
        report.penalty_v_cross += o.pvc;
        report.penalty_v_self += o.pvs;
        report.input_v += o.iv;
        report.penalty_t_cross += o.ptc;
        report.penalty_t_self += o.pts;
        report.input_t += o.it;
    }
    Ok(SspStep { state: next, report })
}

/// Signed slack of the window energy balance: (E_before + inputs) − (E_after + dissipation + penalties).
pub fn verify_ssp_energy(before: &ShellEnergy, after: &ShellEnergy, report: &SspReport) -> f64 {
    (before.total() + report.inputs()) - (after.total() + report.dissipation() + report.penalties())
}
