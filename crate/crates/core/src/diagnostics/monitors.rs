//! Trajectory monitors: exterior density, Korn quotient, pressure concentration in the
//! interface strip, and the penalisation defect.

use rayon::prelude::*;

use crate::constitutive::GasModel;
use crate::coupling::Trajectory;
use crate::error::{Error, Result};
use crate::extension::{extended_pressure, ApproxParams};
use crate::fluid::FluidState;
use crate::geometry::{DisplacementSample, ReferenceGeometry, Vec2};

/// sup over stored frames of ∫_{B∖Ω^{w}} ρ.
pub fn check_exterior_density(trajectory: &Trajectory) -> f64 {
    trajectory
        .frames
        .iter()
        .map(|f| exterior_mass(&f.fluid, &f.interior))
        .fold(0.0, f64::max)
}

pub fn exterior_mass(state: &FluidState, interior: &[bool]) -> f64 {
    state.grid.integrate_with(|k| if interior[k] { 0.0 } else { state.rho[k] })
}

/// Default minimal interior mass for the Korn quotient.
pub const KORN_MASS_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornReport {
    pub quotient: f64,
    /// ‖u‖²_{W^{1,q}(Ω^w)}
    pub numerator: f64,
    /// ‖∇u + ∇ᵀu‖²_{L²(Ω^w)} + ∫ρ|u|²
    pub denominator: f64,
    /// Set when the denominator vanished with a non-zero numerator (quotient = +∞).
    pub flagged: bool,
}

/// Interior-cell velocity gradient: central differences where both neighbours are
/// interior, one-sided where only one is, zero otherwise.
fn interior_gradient(state: &FluidState, interior: &[bool], k: usize) -> [[f64; 2]; 2] {
    let g = state.grid;
    let n = g.n;
    let h = g.h();
    let (i, j) = g.ij(k);
    let inside = |c: Option<usize>| c.filter(|&c| interior[c]);
    let xp = inside((i + 1 < n).then(|| k + 1));
    let xm = inside((i > 0).then(|| k - 1));
    let yp = inside((j + 1 < n).then(|| k + n));
    let ym = inside((j > 0).then(|| k - n));
    let diff = |f: &[f64], p: Option<usize>, m: Option<usize>| -> f64 {
        match (p, m) {
            (Some(p), Some(m)) => (f[p] - f[m]) / (2.0 * h),
            (Some(p), None) => (f[p] - f[k]) / h,
            (None, Some(m)) => (f[k] - f[m]) / h,
            (None, None) => 0.0,
        }
    };
    [
        [diff(&state.ux, xp, xm), diff(&state.ux, yp, ym)],
        [diff(&state.uy, xp, xm), diff(&state.uy, yp, ym)],
    ]
}

/// Discrete Korn quotient over the cells flagged `interior`.
pub fn korn_quotient(state: &FluidState, interior: &[bool], q: f64, mass_floor: f64) -> Result<KornReport> {
    if !(q >= 1.0) {
        return Err(Error::Validation(format!("Korn exponent q = {q} must be at least 1")));
    }
    let g = state.grid;
    let mass = g.integrate_with(|k| if interior[k] { state.rho[k] } else { 0.0 });
    if mass < mass_floor {
        return Err(Error::Validation(format!(
            "interior mass {mass:.3e} below the Korn mass floor {mass_floor:.3e}"
        )));
    }
    let parts: Vec<(f64, f64, f64)> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if !interior[k] {
                return (0.0, 0.0, 0.0);
            }
            let gu = interior_gradient(state, interior, k);
            let u = [state.ux[k], state.uy[k]];
            let u2 = u[0] * u[0] + u[1] * u[1];
            let gnorm2 = gu[0][0].powi(2) + gu[0][1].powi(2) + gu[1][0].powi(2) + gu[1][1].powi(2);
            let sym = [[2.0 * gu[0][0], gu[0][1] + gu[1][0]], [gu[0][1] + gu[1][0], 2.0 * gu[1][1]]];
            let sym2 = sym[0][0].powi(2) + 2.0 * sym[0][1].powi(2) + sym[1][1].powi(2);
            (u2.powf(0.5 * q) + gnorm2.powf(0.5 * q), sym2, state.rho[k] * u2)
        })
        .collect();
    let a = g.cell_area();
    let wq: f64 = parts.iter().map(|p| p.0).sum::<f64>() * a;
    let numerator = wq.powf(2.0 / q);
    let denominator = parts.iter().map(|p| p.1 + p.2).sum::<f64>() * a;
    let (quotient, flagged) = if numerator == 0.0 {
        (0.0, false)
    } else if denominator == 0.0 {
        (f64::INFINITY, true)
    } else {
        (numerator / denominator, false)
    };
    Ok(KornReport { quotient, numerator, denominator, flagged })
}

/// min{K s, 1}
#[inline]
pub fn strip_ramp(k: f64, s: f64) -> f64 {
    (k * s).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripReport {
    pub k: f64,
    /// ∫_{S_K} p_{η,δ}
    pub pressure_integral: f64,
    /// |S_K| by cell count.
    pub strip_area: f64,
    pub strip_cells: usize,
    /// Smallest pointwise div φ^K over strip cells.
    pub min_divergence: f64,
    /// K·min f_Γ(d) − c over the strip, c from the profile slope and the curvature.
    pub divergence_bound: f64,
    pub certified: bool,
}

/// φ^K(X) = f_Γ(d) · min{K(d − w(π)), 1} · n(π), zero outside the tube.
pub fn strip_field(geometry: &ReferenceGeometry, w: &DisplacementSample, k: f64, x: Vec2) -> Vec2 {
    match geometry.tube_coords(x) {
        Some((d, y)) => {
            let s = geometry.profile.value(d) * strip_ramp(k, d - w.eval(y));
            let n = geometry.chart.normal(y);
            [s * n[0], s * n[1]]
        }
        None => [0.0, 0.0],
    }
}

/// Strip integral of the extended pressure on S_K = {|d − w(π)| < 1/K} together with a
/// pointwise divergence certificate for φ^K.
pub fn pressure_strip_monitor(
    state: &FluidState,
    gas: &GasModel,
    approx: &ApproxParams,
    geometry: &ReferenceGeometry,
    w: &DisplacementSample,
    k: f64,
) -> Result<StripReport> {
    let thickness = geometry.b - geometry.a;
    if !(k >= 2.0 / thickness) {
        return Err(Error::Validation(format!("K = {k} must be at least 2/(b − a) = {}", 2.0 / thickness)));
    }
    let g = state.grid;
    let eps = 1e-6 * g.h();
    let kappa_max = 1.0 / geometry.chart.min_curvature_radius();
    let curvature = kappa_max / (1.0 - geometry.a.abs() * kappa_max).max(1e-12);
    let c = geometry.profile.slope_bound() + curvature;
    let cells: Vec<Option<(f64, f64, f64)>> = (0..g.len())
        .into_par_iter()
        .map(|c| {
            let x = g.center(c);
            let (d, y) = geometry.tube_coords(x)?;
            if (d - w.eval(y)).abs() >= 1.0 / k {
                return None;
            }
            let p = extended_pressure(gas, state.rho[c].max(0.0), state.theta[c], state.chi[c], approx).unwrap_or(0.0);
            let fx = |dx: f64, dy: f64| strip_field(geometry, w, k, [x[0] + dx, x[1] + dy]);
            let div = (fx(eps, 0.0)[0] - fx(-eps, 0.0)[0] + fx(0.0, eps)[1] - fx(0.0, -eps)[1]) / (2.0 * eps);
            Some((p, div, geometry.profile.value(d)))
        })
        .collect();
    let a = g.cell_area();
    let mut report = StripReport {
        k,
        pressure_integral: 0.0,
        strip_area: 0.0,
        strip_cells: 0,
        min_divergence: f64::INFINITY,
        divergence_bound: f64::INFINITY,
        certified: true,
    };
    let mut f_min = f64::INFINITY;
    for (p, div, f) in cells.into_iter().flatten() {
        report.pressure_integral += a * p;
        report.strip_area += a;
        report.strip_cells += 1;
        report.min_divergence = report.min_divergence.min(div);
        f_min = f_min.min(f);
    }
    if report.strip_cells > 0 {
        report.divergence_bound = k * f_min - c;
        report.certified = report.min_divergence >= report.divergence_bound;
    }
    Ok(report)
}

/// δ∫₀ᵀ Σ_j (|v_j − ∂t w_j n_j|² + |τ_j − θ_j|²) Δy dt from the stored frames, using the
/// penalty-kernel traces, trapezoid in time.
pub fn penalization_defect(trajectory: &Trajectory) -> f64 {
    let frames = &trajectory.frames;
    if frames.len() < 2 {
        return 0.0;
    }
    let mismatch: Vec<f64> = frames
        .iter()
        .map(|f| {
            let dy = if f.normals.is_empty() { 0.0 } else { 1.0 / f.normals.len() as f64 };
            let mut s = 0.0;
            for j in 0..f.normals.len() {
                let a = [f.shell_v[j] * f.normals[j][0], f.shell_v[j] * f.normals[j][1]];
                let dv = [f.kernel_v[j][0] - a[0], f.kernel_v[j][1] - a[1]];
                s += dv[0] * dv[0] + dv[1] * dv[1] + (f.kernel_tau[j] - f.shell_theta[j]).powi(2);
            }
            s * dy
        })
        .collect();
    let mut total = 0.0;
    for (i, w) in frames.windows(2).enumerate() {
        total += 0.5 * (w[1].time - w[0].time) * (mismatch[i] + mismatch[i + 1]);
    }
    trajectory.delta * total
}

/// Sub-step resolved variant of the defect read from the fluid ledger columns:
/// δ∫Σ|v − a|² = 2Δt · (δ/2Δt)∫Σ|v − a|².
pub fn penalization_defect_from_ledger(ledger: &crate::diagnostics::EnergyLedger, dt: f64) -> f64 {
    ledger.last().map_or(0.0, |r| 2.0 * dt * (r.pen_fluid_v_cum + r.pen_fluid_t_cum))
}
