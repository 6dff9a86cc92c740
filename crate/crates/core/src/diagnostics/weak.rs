//! Weak-form residuals of the coupled entropy inequality and of the energy inequality,
//! evaluated by space-time quadrature on arbitrary fields (computed trajectories or
//! closed-form manufactured solutions), plus the blended test pairs that make a bulk
//! test function trace-compatible with a shell test function.

use rayon::prelude::*;

use crate::constitutive::{entropy_production, GasModel, Mat2, TransportModel};
use crate::coupling::{Frame, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{ReferenceGeometry, Vec2};
use crate::structure::ShellParams;

use num_complex::Complex64;

/// Fluid fields and first derivatives at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluidPoint {
    pub rho: f64,
    pub u: Vec2,
    pub theta: f64,
    /// (∇u)_{ij} = ∂_j u_i
    pub grad_u: Mat2,
    pub grad_theta: Vec2,
}

/// Shell fields and the derivatives the weak forms need.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShellPoint {
    pub w: f64,
    pub w_y: f64,
    pub w_yy: f64,
    pub w_t: f64,
    pub w_ty: f64,
    pub theta: f64,
    pub theta_y: f64,
}

/// Space-time data the weak residuals are evaluated on.
pub trait SpaceTimeFields: Sync {
    fn fluid(&self, x: Vec2, t: f64) -> FluidPoint;
    fn shell(&self, y: f64, t: f64) -> ShellPoint;
    /// Quadrature nodes and weights of the physical domain Ω^{w(t)}.
    fn domain_quadrature(&self, t: f64) -> Vec<(Vec2, f64)>;
    /// Number of uniform (periodic trapezoid) nodes on Γ.
    fn gamma_nodes(&self) -> usize;
    /// Trapezoid nodes in time, first = 0, last = T.
    fn time_nodes(&self) -> Vec<f64>;
    /// Volume entropy source ς with ∂t(ρs) + div(ρsu + q/ϑ) = σ + ς.
    fn entropy_source(&self, _x: Vec2, _t: f64) -> f64 {
        0.0
    }
    /// Shell entropy source χ with θ_t − θ_yy − w_tyy = (interface flux) + χ.
    fn shell_entropy_source(&self, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Total power supplied by external sources at time t.
    fn energy_source_power(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Constitutive data for the weak forms.
#[derive(Debug, Clone, Copy)]
pub struct WeakModel {
    pub gas: GasModel,
    pub transport: TransportModel,
    pub shell: ShellParams,
}

/// Cut-off layers m < a¹ < a² < w < b¹ < b² < M in the signed-distance coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendLayers {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// C² smoothstep on [0, 1].
#[inline]
fn smoothstep(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    z * z * z * (10.0 - 15.0 * z + 6.0 * z * z)
}

impl BlendLayers {
    /// φ_blend as a function of the signed distance: 0 outside (a¹, b²), 1 on [a², b¹].
    pub fn cutoff(&self, d: f64) -> f64 {
        if d <= self.a1 || d >= self.b2 {
            0.0
        } else if d < self.a2 {
            smoothstep((d - self.a1) / (self.a2 - self.a1))
        } else if d <= self.b1 {
            1.0
        } else {
            smoothstep((self.b2 - d) / (self.b2 - self.b1))
        }
    }
}

pub type ScalarField<'a> = &'a (dyn Fn(Vec2, f64) -> f64 + Sync);
pub type VectorField<'a> = &'a (dyn Fn(Vec2, f64) -> Vec2 + Sync);
pub type GammaField<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

#[derive(Clone, Copy)]
pub enum TestField<'a> {
    /// Entropy pair: γφ = ψ.
    Scalar(ScalarField<'a>),
    /// Momentum pair: γφ = ψn.
    Vector(VectorField<'a>),
}

/// Blended test pair φ_b = φ + φ_blend(ψ∘π [n∘π] − φ) with its shell companion ψ.
#[derive(Clone, Copy)]
pub struct TestPair<'a> {
    pub field: TestField<'a>,
    pub psi: GammaField<'a>,
    pub geometry: &'a ReferenceGeometry,
    /// Displacement w(y, t) the layers are nested around.
    pub w: GammaField<'a>,
    pub layers: BlendLayers,
}

const FD_STEP: f64 = 1e-5;

/// Validates the layer ordering against w at the Γ-nodes and the given times.
pub fn build_test_pair<'a>(
    field: TestField<'a>,
    psi: GammaField<'a>,
    geometry: &'a ReferenceGeometry,
    w: GammaField<'a>,
    layers: BlendLayers,
    times: &[f64],
) -> Result<TestPair<'a>> {
    let BlendLayers { a1, a2, b1, b2 } = layers;
    if !(geometry.a < a1 && a1 < a2 && b1 < b2 && b2 < geometry.b) {
        return Err(Error::Validation(format!(
            "blend layers must satisfy m < a1 < a2 < b1 < b2 < M (got m = {}, {a1}, {a2}, {b1}, {b2}, M = {})",
            geometry.a, geometry.b
        )));
    }
    let n = geometry.n_gamma;
    for &t in times {
        for j in 0..n {
            let y = j as f64 / n as f64;
            let wv = w(y, t);
            if !(a2 < wv && wv < b1) {
                return Err(Error::Validation(format!(
                    "displacement {wv} at y = {y}, t = {t} is not nested between a2 = {a2} and b1 = {b1}"
                )));
            }
        }
    }
    Ok(TestPair { field, psi, geometry, w, layers })
}

impl<'a> TestPair<'a> {
    pub fn is_vector(&self) -> bool {
        matches!(self.field, TestField::Vector(_))
    }

    /// Blended field; scalar pairs use component 0.
    pub fn eval(&self, x: Vec2, t: f64) -> Vec2 {
        let base = match self.field {
            TestField::Scalar(f) => [f(x, t), 0.0],
            TestField::Vector(f) => f(x, t),
        };
        let Some((d, y)) = self.geometry.tube_coords(x) else {
            return base;
        };
        let c = self.layers.cutoff(d);
        if c == 0.0 {
            return base;
        }
        let p = (self.psi)(y, t);
        let target = match self.field {
            TestField::Scalar(_) => [p, 0.0],
            TestField::Vector(_) => {
                let n = self.geometry.chart.normal(y);
                [p * n[0], p * n[1]]
            }
        };
        [base[0] + c * (target[0] - base[0]), base[1] + c * (target[1] - base[1])]
    }

    pub fn scalar(&self, x: Vec2, t: f64) -> f64 {
        self.eval(x, t)[0]
    }

    /// (φ, ∂tφ, ∇φ) of a scalar pair by central differences.
    pub fn scalar_jet(&self, x: Vec2, t: f64) -> (f64, f64, Vec2) {
        let e = FD_STEP;
        let f = |x: Vec2, t: f64| self.scalar(x, t);
        (
            f(x, t),
            (f(x, t + e) - f(x, t - e)) / (2.0 * e),
            [
                (f([x[0] + e, x[1]], t) - f([x[0] - e, x[1]], t)) / (2.0 * e),
                (f([x[0], x[1] + e], t) - f([x[0], x[1] - e], t)) / (2.0 * e),
            ],
        )
    }

    /// (ψ, ψ_t, ψ_y, ψ_ty) by central differences.
    pub fn psi_jet(&self, y: f64, t: f64) -> [f64; 4] {
        let e = FD_STEP;
        let p = self.psi;
        [
            p(y, t),
            (p(y, t + e) - p(y, t - e)) / (2.0 * e),
            (p(y + e, t) - p(y - e, t)) / (2.0 * e),
            (p(y + e, t + e) - p(y - e, t + e) - p(y + e, t - e) + p(y - e, t - e)) / (4.0 * e * e),
        ]
    }

    /// sup over Γ-nodes of |γφ_b − ψ(n)| at time t, evaluated at the deformed points.
    pub fn trace_mismatch(&self, t: f64) -> f64 {
        let n = self.geometry.n_gamma;
        (0..n)
            .map(|j| {
                let y = j as f64 / n as f64;
                let p0 = self.geometry.chart.point(y);
                let nn = self.geometry.chart.normal(y);
                let wv = (self.w)(y, t);
                let x = [p0[0] + wv * nn[0], p0[1] + wv * nn[1]];
                let v = self.eval(x, t);
                let p = (self.psi)(y, t);
                match self.field {
                    TestField::Scalar(_) => (v[0] - p).abs(),
                    TestField::Vector(_) => ((v[0] - p * nn[0]).powi(2) + (v[1] - p * nn[1]).powi(2)).sqrt(),
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Signed residual with a scale for relative statements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeakResidual {
    /// LHS − RHS of the weak form.
    pub residual: f64,
    /// Sum of the absolute values of the individual contributions.
    pub scale: f64,
}

impl WeakResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            0.0
        }
    }
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Coupled entropy residual
/// ∫∫ρs(∂tφ + u·∇φ) − κ∇ϑ·∇φ/ϑ + σφ + ςφ + ∫∫_Γ θψ_t − θ_yψ_y + w_yψ_ty + χψ
///   − [∫ρsφ + ∫_Γ θψ + w_yψ_y]₀ᵀ,
/// which vanishes for smooth solutions and is ≤ 0 for the inequality.
pub fn entropy_inequality_residual(
    fields: &dyn SpaceTimeFields,
    model: &WeakModel,
    pair: &TestPair<'_>,
) -> Result<WeakResidual> {
    if pair.is_vector() {
        return Err(Error::Validation("entropy residual needs a scalar test pair".into()));
    }
    let times = fields.time_nodes();
    if times.len() < 2 {
        return Ok(WeakResidual::default());
    }
    let ng = fields.gamma_nodes();
    let dy = 1.0 / ng as f64;
    let gas = &model.gas;
    let tr = &model.transport;

    let bulk = |t: f64| -> Result<(f64, f64, f64, f64)> {
        let quad = fields.domain_quadrature(t);
        let parts: Result<Vec<(f64, f64, f64)>> = quad
            .par_iter()
            .map(|&(x, wq)| {
                let (phi, phi_t, gphi) = pair.scalar_jet(x, t);
                let f = fields.fluid(x, t);
                let theta = f.theta;
                let rs = gas.rho_s(f.rho.max(0.0), theta)?;
                let sigma = entropy_production(tr, theta, f.grad_u, f.grad_theta)?;
                let k = tr.kappa(theta);
                let integrand = rs * (phi_t + f.u[0] * gphi[0] + f.u[1] * gphi[1])
                    - k * (f.grad_theta[0] * gphi[0] + f.grad_theta[1] * gphi[1]) / theta
                    + sigma * phi
                    + fields.entropy_source(x, t) * phi;
                let abs = (rs * phi_t).abs() + (rs * (f.u[0] * gphi[0] + f.u[1] * gphi[1])).abs() + (sigma * phi).abs();
                Ok((wq * integrand, wq * abs, wq * rs * phi))
            })
            .collect();
        let parts = parts?;
        let shell: Vec<(f64, f64, f64)> = (0..ng)
            .map(|j| {
                let y = j as f64 * dy;
                let s = fields.shell(y, t);
                let [p, p_t, p_y, p_ty] = pair.psi_jet(y, t);
                let integrand = s.theta * p_t - s.theta_y * p_y + s.w_y * p_ty + fields.shell_entropy_source(y, t) * p;
                let abs = (s.theta * p_t).abs() + (s.theta_y * p_y).abs() + (s.w_y * p_ty).abs();
                (dy * integrand, dy * abs, dy * (s.theta * p + s.w_y * p_y))
            })
            .collect();
        let sum = |v: &[(f64, f64, f64)], i: usize| -> f64 {
            v.iter().map(|p| [p.0, p.1, p.2][i]).sum()
        };
        Ok((sum(&parts, 0) + sum(&shell, 0), sum(&parts, 1) + sum(&shell, 1), sum(&parts, 2) + sum(&shell, 2), 0.0))
    };
    let mut integrand = Vec::with_capacity(times.len());
    let mut scale = Vec::with_capacity(times.len());
    let mut boundary = Vec::with_capacity(times.len());
    for &t in &times {
        let (i, s, b, _) = bulk(t)?;
        integrand.push(i);
        scale.push(s);
        boundary.push(b);
    }
    let b0 = boundary[0];
    let bt = *boundary.last().unwrap_or(&0.0);
    let residual = trapezoid(&times, &integrand) - (bt - b0);
    Ok(WeakResidual { residual, scale: trapezoid(&times, &scale) + bt.abs() + b0.abs() })
}

/// Energy of the physical system at time t: fluid in Ω^{w(t)} plus the shell.
pub fn physical_energy(fields: &dyn SpaceTimeFields, model: &WeakModel, t: f64) -> Result<f64> {
    let quad = fields.domain_quadrature(t);
    let fluid: Result<Vec<f64>> = quad
        .par_iter()
        .map(|&(x, wq)| {
            let f = fields.fluid(x, t);
            let re = model.gas.rho_e(f.rho.max(0.0), f.theta.max(0.0))?;
            Ok(wq * (0.5 * f.rho * (f.u[0] * f.u[0] + f.u[1] * f.u[1]) + re))
        })
        .collect();
    let ng = fields.gamma_nodes();
    let dy = 1.0 / ng as f64;
    let p = &model.shell;
    let shell: f64 = (0..ng)
        .map(|j| {
            let s = fields.shell(j as f64 * dy, t);
            dy * 0.5 * (s.w_t * s.w_t + p.stiffness * s.w_yy * s.w_yy + p.alpha2 * s.w_ty * s.w_ty + s.theta * s.theta)
        })
        .sum();
    Ok(fluid?.iter().sum::<f64>() + shell)
}

/// Energy residual E(T) − E(0) + ∫(α₁‖∂t∇w‖² + ‖∇θ‖²) − ∫P: zero for smooth solutions,
/// ≤ 0 for the inequality.
pub fn energy_residual(fields: &dyn SpaceTimeFields, model: &WeakModel) -> Result<WeakResidual> {
    let times = fields.time_nodes();
    if times.len() < 2 {
        return Ok(WeakResidual::default());
    }
    let ng = fields.gamma_nodes();
    let dy = 1.0 / ng as f64;
    let diss: Vec<f64> = times
        .iter()
        .map(|&t| {
            (0..ng)
                .map(|j| {
                    let s = fields.shell(j as f64 * dy, t);
                    dy * (model.shell.alpha1 * s.w_ty * s.w_ty + s.theta_y * s.theta_y)
                })
                .sum()
        })
        .collect();
    let power: Vec<f64> = times.iter().map(|&t| fields.energy_source_power(t)).collect();
    let e0 = physical_energy(fields, model, times[0])?;
    let et = physical_energy(fields, model, *times.last().unwrap_or(&0.0))?;
    let d = trapezoid(&times, &diss);
    let p = trapezoid(&times, &power);
    Ok(WeakResidual { residual: et - e0 + d - p, scale: et.abs() + e0.abs() + d.abs() + p.abs() })
}

/// Piecewise-linear-in-time view of a stored trajectory: cell fields with central
/// differences, shell fields from the Fourier modes, quadrature on interior cell centres.
pub struct TrajectoryFields<'a> {
    pub trajectory: &'a Trajectory,
}

impl<'a> TrajectoryFields<'a> {
    pub fn new(trajectory: &'a Trajectory) -> Result<Self> {
        if trajectory.frames.is_empty() {
            return Err(Error::Validation("trajectory holds no frames".into()));
        }
        Ok(TrajectoryFields { trajectory })
    }

    /// Bracketing frames and the weight of the later one.
    fn locate(&self, t: f64) -> (&Frame, &Frame, f64) {
        let f = &self.trajectory.frames;
        let i = f.partition_point(|fr| fr.time < t).min(f.len() - 1);
        if i == 0 {
            return (&f[0], &f[0], 0.0);
        }
        let (a, b) = (&f[i - 1], &f[i]);
        let s = if b.time > a.time { ((t - a.time) / (b.time - a.time)).clamp(0.0, 1.0) } else { 1.0 };
        (a, b, s)
    }

    /// Cell values with gradients from interior neighbours only (one-sided next to Γ), so
    /// that the degraded exterior state never leaks into the weak forms on Ω^w.
    fn cell_point(frame: &Frame, k: usize) -> FluidPoint {
        let s = &frame.fluid;
        let g = s.grid;
        let n = g.n;
        let h = g.h();
        let (i, j) = g.ij(k);
        let inside = |c: usize| frame.interior[c];
        let diff = |f: &[f64], lo: Option<usize>, hi: Option<usize>| -> f64 {
            match (lo.filter(|&c| inside(c)), hi.filter(|&c| inside(c))) {
                (Some(a), Some(b)) => (f[b] - f[a]) / (2.0 * h),
                (None, Some(b)) => (f[b] - f[k]) / h,
                (Some(a), None) => (f[k] - f[a]) / h,
                (None, None) => 0.0,
            }
        };
        let west = (i > 0).then(|| k - 1);
        let east = (i + 1 < n).then(|| k + 1);
        let south = (j > 0).then(|| k - n);
        let north = (j + 1 < n).then(|| k + n);
        let dx = |f: &[f64]| diff(f, west, east);
        let dy = |f: &[f64]| diff(f, south, north);
        FluidPoint {
            rho: s.rho[k],
            u: [s.ux[k], s.uy[k]],
            theta: s.theta[k],
            grad_u: [[dx(&s.ux), dy(&s.ux)], [dx(&s.uy), dy(&s.uy)]],
            grad_theta: [dx(&s.theta), dy(&s.theta)],
        }
    }
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + s * (b - a)
}

/// Value and first two y-derivatives of the real field with modes `c` at y.
fn modal(c: &[Complex64], y: f64) -> (f64, f64, f64) {
    let mut v = c.first().map_or(0.0, |z| z.re);
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (m, z) in c.iter().enumerate().skip(1) {
        let k = std::f64::consts::TAU * m as f64;
        let e = z * Complex64::from_polar(1.0, k * y);
        v += 2.0 * e.re;
        d1 += 2.0 * (e * Complex64::new(0.0, k)).re;
        d2 -= 2.0 * k * k * e.re;
    }
    (v, d1, d2)
}

impl SpaceTimeFields for TrajectoryFields<'_> {
    fn fluid(&self, x: Vec2, t: f64) -> FluidPoint {
        let (a, b, s) = self.locate(t);
        let g = a.fluid.grid;
        let h = g.h();
        let idx = |c: f64| (((c + g.half_width) / h).floor().max(0.0) as usize).min(g.n - 1);
        let k = g.idx(idx(x[0]), idx(x[1]));
        let (pa, pb) = (Self::cell_point(a, k), Self::cell_point(b, k));
        let mix2 = |p: Mat2, q: Mat2| [[lerp(p[0][0], q[0][0], s), lerp(p[0][1], q[0][1], s)], [lerp(p[1][0], q[1][0], s), lerp(p[1][1], q[1][1], s)]];
        FluidPoint {
            rho: lerp(pa.rho, pb.rho, s),
            u: [lerp(pa.u[0], pb.u[0], s), lerp(pa.u[1], pb.u[1], s)],
            theta: lerp(pa.theta, pb.theta, s),
            grad_u: mix2(pa.grad_u, pb.grad_u),
            grad_theta: [lerp(pa.grad_theta[0], pb.grad_theta[0], s), lerp(pa.grad_theta[1], pb.grad_theta[1], s)],
        }
    }

    fn shell(&self, y: f64, t: f64) -> ShellPoint {
        let (a, b, s) = self.locate(t);
        let eval = |f: &Frame| {
            let (w, w_y, w_yy) = modal(&f.shell.w, y);
            let (w_t, w_ty, _) = modal(&f.shell.v, y);
            let (th, th_y, _) = modal(&f.shell.theta, y);
            [w, w_y, w_yy, w_t, w_ty, th, th_y]
        };
        let (pa, pb) = (eval(a), eval(b));
        let v: Vec<f64> = pa.iter().zip(&pb).map(|(p, q)| lerp(*p, *q, s)).collect();
        ShellPoint { w: v[0], w_y: v[1], w_yy: v[2], w_t: v[3], w_ty: v[4], theta: v[5], theta_y: v[6] }
    }

    fn domain_quadrature(&self, t: f64) -> Vec<(Vec2, f64)> {
        let (_, b, _) = self.locate(t);
        let g = b.fluid.grid;
        let a = g.cell_area();
        (0..g.len()).filter(|&k| b.interior[k]).map(|k| (g.center(k), a)).collect()
    }

    fn gamma_nodes(&self) -> usize {
        self.trajectory.frames[0].normals.len().max(1)
    }

    fn time_nodes(&self) -> Vec<f64> {
        self.trajectory.frames.iter().map(|f| f.time).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_one_between_inner_layers() {
        let l = BlendLayers { a1: -0.3, a2: -0.2, b1: 0.2, b2: 0.3 };
        assert_eq!(l.cutoff(0.0), 1.0);
        assert_eq!(l.cutoff(-0.35), 0.0);
        assert_eq!(l.cutoff(0.31), 0.0);
        assert!((l.cutoff(-0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn layer_ordering_is_validated() {
        let g = ReferenceGeometry::default();
        let phi = |_: Vec2, _: f64| 0.0;
        let psi = |_: f64, _: f64| 0.0;
        let w = |_: f64, _: f64| 0.25;
        let bad = BlendLayers { a1: -0.3, a2: -0.2, b1: 0.2, b2: 0.3 };
        assert!(build_test_pair(TestField::Scalar(&phi), &psi, &g, &w, bad, &[0.0]).is_err());
        let good = BlendLayers { a1: -0.3, a2: -0.2, b1: 0.3, b2: 0.4 };
        assert!(build_test_pair(TestField::Scalar(&phi), &psi, &g, &w, good, &[0.0]).is_ok());
    }
}
