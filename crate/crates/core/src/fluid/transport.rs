//! Conservative transport of (ρ, m, E) with Rusanov fluxes and SSP-RK2 in time.
//! E is the total energy ½|m|²/ρ + ρe_η + δρ^β/(β−1), so pressure work (including the
//! artificial pressure) is exchanged with internal energy without leaving the ledger.

use rayon::prelude::*;

use crate::constitutive::GasModel;
use crate::extension::{artificial_energy, ApproxParams};
use crate::grid::Grid;

use super::state::{FluidState, VACUUM};

/// Source hook for manufactured solutions: (cell centre, time) ↦ (S_ρ, S_mx, S_my, S_E).
pub type SourceFn<'a> = &'a (dyn Fn([f64; 2], f64) -> [f64; 4] + Sync);

#[derive(Debug, Clone)]
pub struct Conserved {
    pub rho: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
    pub e: Vec<f64>,
}

pub(crate) struct Thermo<'a> {
    pub gas: &'a GasModel,
    pub approx: &'a ApproxParams,
    pub chi: &'a [f64],
    pub floor: f64,
}

#[derive(Clone, Copy, Default)]
pub(crate) struct Prim {
    pub u: [f64; 2],
    pub p: f64,
    pub s: f64,
}

impl Conserved {
    pub fn from_state(state: &FluidState, gas: &GasModel, approx: &ApproxParams) -> Self {
        let n = state.len();
        Conserved {
            rho: state.rho.clone(),
            mx: state.mx.clone(),
            my: state.my.clone(),
            e: (0..n).map(|k| state.total_energy_density(gas, approx, k)).collect(),
        }
    }

    #[inline]
    pub fn kinetic(&self, k: usize) -> f64 {
        if self.rho[k] > VACUUM {
            0.5 * (self.mx[k] * self.mx[k] + self.my[k] * self.my[k]) / self.rho[k]
        } else {
            0.0
        }
    }

    /// ρe_η = E − kinetic − artificial.
    #[inline]
    pub fn internal(&self, k: usize, approx: &ApproxParams) -> f64 {
        self.e[k] - self.kinetic(k) - artificial_energy(self.rho[k], approx)
    }
}

impl Thermo<'_> {
    /// Temperature recovered from the internal energy; flags a floor clamp.
    #[inline]
    pub fn temperature(&self, k: usize, rho: f64, rho_e: f64, guess: f64) -> (f64, bool) {
        self.gas.temperature_from_energy(rho.max(0.0), rho_e, self.chi[k], self.floor, guess)
    }

    #[inline]
    pub fn pressure(&self, k: usize, rho: f64, theta: f64) -> f64 {
        let r = rho.max(0.0);
        self.gas.p_molecular(r, theta)
            + self.chi[k] * self.gas.p_radiative(theta)
            + self.approx.delta * r.powf(self.approx.beta)
    }

    /// Sound speed c² = p_ρ + ϑ p_ϑ² / (ρ C) with ρ bounded below to keep vacuum finite.
    #[inline]
    pub fn sound_speed(&self, k: usize, rho: f64, theta: f64) -> f64 {
        let r = rho.max(0.0);
        let chi = self.chi[k];
        let p_rho = self.gas.dp_drho(r, theta) + self.approx.delta * self.approx.beta * r.powf(self.approx.beta - 1.0);
        let p_theta = self.gas.dp_dtheta(r, theta, chi);
        let cap = self.gas.heat_capacity(r, theta, chi);
        let r_eff = r.max(1e-3);
        let thermal = if cap > 0.0 { theta * p_theta * p_theta / (r_eff * cap) } else { 0.0 };
        (p_rho + thermal).max(0.0).sqrt()
    }
}

/// Primitive variables and recovered temperatures; returns the number of floor clamps.
pub(crate) fn primitives(u: &Conserved, th: &Thermo<'_>, theta: &mut [f64]) -> (Vec<Prim>, usize) {
    let out: Vec<(Prim, f64, bool)> = (0..u.rho.len())
        .into_par_iter()
        .map(|k| {
            let rho = u.rho[k];
            let (t, clamped) = th.temperature(k, rho, u.internal(k, th.approx), theta[k]);
            let vel = if rho > VACUUM { [u.mx[k] / rho, u.my[k] / rho] } else { [0.0, 0.0] };
            let p = th.pressure(k, rho, t);
            let s = (vel[0] * vel[0] + vel[1] * vel[1]).sqrt() + th.sound_speed(k, rho, t);
            (Prim { u: vel, p, s }, t, clamped)
        })
        .collect();
    let mut clamps = 0;
    let prims = out
        .into_iter()
        .enumerate()
        .map(|(k, (p, t, c))| {
            theta[k] = t;
            clamps += c as usize;
            p
        })
        .collect();
    (prims, clamps)
}

pub(crate) fn max_speed(prims: &[Prim]) -> f64 {
    prims.iter().map(|p| p.s).fold(0.0, f64::max)
}

#[inline]
fn flux(rho: f64, mx: f64, my: f64, e: f64, pr: &Prim, axis: usize) -> [f64; 4] {
    let un = pr.u[axis];
    let mn = if axis == 0 { mx } else { my };
    let mut f = [mn, mx * un, my * un, (e + pr.p) * un];
    f[1 + axis] += pr.p;
    let _ = rho;
    f
}

/// Rusanov face flux between cells L and R along `axis`.
#[inline]
fn face_flux(l: [f64; 4], pl: &Prim, r: [f64; 4], pr: &Prim, axis: usize) -> [f64; 4] {
    let fl = flux(l[0], l[1], l[2], l[3], pl, axis);
    let fr = flux(r[0], r[1], r[2], r[3], pr, axis);
    let a = pl.s.max(pr.s);
    [
        0.5 * (fl[0] + fr[0]) - 0.5 * a * (r[0] - l[0]),
        0.5 * (fl[1] + fr[1]) - 0.5 * a * (r[1] - l[1]),
        0.5 * (fl[2] + fr[2]) - 0.5 * a * (r[2] - l[2]),
        0.5 * (fl[3] + fr[3]) - 0.5 * a * (r[3] - l[3]),
    ]
}

/// Mirror state across a wall normal to `axis`.
#[inline]
fn mirror(c: [f64; 4], p: &Prim, axis: usize) -> ([f64; 4], Prim) {
    let mut g = c;
    g[1 + axis] = -g[1 + axis];
    let mut q = *p;
    q.u[axis] = -q.u[axis];
    (g, q)
}

/// −div F for every cell (per unit area).
pub(crate) fn rusanov_rhs(grid: &Grid, u: &Conserved, prims: &[Prim]) -> Vec<[f64; 4]> {
    let n = grid.n;
    let h = grid.h();
    let cell = |k: usize| [u.rho[k], u.mx[k], u.my[k], u.e[k]];
    // x-faces: (n+1) per row; face f between cells f-1 and f.
    let xf: Vec<[f64; 4]> = (0..n * (n + 1))
        .into_par_iter()
        .map(|id| {
            let (f, j) = (id % (n + 1), id / (n + 1));
            if f == 0 {
                let k = grid.idx(0, j);
                let (g, q) = mirror(cell(k), &prims[k], 0);
                face_flux(g, &q, cell(k), &prims[k], 0)
            } else if f == n {
                let k = grid.idx(n - 1, j);
                let (g, q) = mirror(cell(k), &prims[k], 0);
                face_flux(cell(k), &prims[k], g, &q, 0)
            } else {
                let (kl, kr) = (grid.idx(f - 1, j), grid.idx(f, j));
                face_flux(cell(kl), &prims[kl], cell(kr), &prims[kr], 0)
            }
        })
        .collect();
    let yf: Vec<[f64; 4]> = (0..n * (n + 1))
        .into_par_iter()
        .map(|id| {
            let (i, f) = (id % n, id / n);
            if f == 0 {
                let k = grid.idx(i, 0);
                let (g, q) = mirror(cell(k), &prims[k], 1);
                face_flux(g, &q, cell(k), &prims[k], 1)
            } else if f == n {
                let k = grid.idx(i, n - 1);
                let (g, q) = mirror(cell(k), &prims[k], 1);
                face_flux(cell(k), &prims[k], g, &q, 1)
            } else {
                let (kb, kt) = (grid.idx(i, f - 1), grid.idx(i, f));
                face_flux(cell(kb), &prims[kb], cell(kt), &prims[kt], 1)
            }
        })
        .collect();
    // Wall mass and energy fluxes vanish identically; enforce exact zeros.
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.ij(k);
            let mut left = xf[j * (n + 1) + i];
            let mut right = xf[j * (n + 1) + i + 1];
            let mut bottom = yf[j * n + i];
            let mut top = yf[(j + 1) * n + i];
            for (face, wall) in [(&mut left, i == 0), (&mut right, i == n - 1), (&mut bottom, j == 0), (&mut top, j == n - 1)] {
                if wall {
                    face[0] = 0.0;
                    face[3] = 0.0;
                }
            }
            let mut r = [0.0; 4];
            for q in 0..4 {
                r[q] = -((right[q] - left[q]) + (top[q] - bottom[q])) / h;
            }
            r
        })
        .collect()
}

/// Outcome of one transport sub-step.
pub(crate) struct TransportOutcome {
    pub fallback: bool,
    pub clamps: usize,
}

/// No momentum without mass (kinetic energy is kept in E).
fn vacuum_rule(u: &mut Conserved) {
    for k in 0..u.rho.len() {
        if u.rho[k] < VACUUM {
            u.mx[k] = 0.0;
            u.my[k] = 0.0;
        }
    }
}

fn apply(
    base: &Conserved,
    rhs: &[[f64; 4]],
    dt: f64,
    grid: &Grid,
    source: Option<SourceFn<'_>>,
    t: f64,
) -> Conserved {
    let n = base.rho.len();
    let mut out = base.clone();
    for k in 0..n {
        let mut r = rhs[k];
        if let Some(src) = source {
            let s = src(grid.center(k), t);
            for q in 0..4 {
                r[q] += s[q];
            }
        }
        out.rho[k] += dt * r[0];
        out.mx[k] += dt * r[1];
        out.my[k] += dt * r[2];
        out.e[k] += dt * r[3];
    }
    out
}

/// One SSP-RK2 (Heun) step: a convex combination of two forward-Euler stages, so the
/// positivity of the first-order Rusanov update carries over. Falls back to a single
/// forward-Euler stage if the second stage still produces negative density.
pub(crate) fn transport_step(
    grid: &Grid,
    u: &mut Conserved,
    theta: &mut Vec<f64>,
    prims0: &[Prim],
    dt: f64,
    th: &Thermo<'_>,
    source: Option<SourceFn<'_>>,
    t: f64,
) -> TransportOutcome {
    let mut clamps = 0;
    let rhs0 = rusanov_rhs(grid, u, prims0);
    let mut stage = apply(u, &rhs0, dt, grid, source, t);
    vacuum_rule(&mut stage);
    let mut theta_stage = theta.clone();
    let mut candidate = None;
    if stage.rho.iter().all(|&r| r >= 0.0) {
        let (prims1, c) = primitives(&stage, th, &mut theta_stage);
        let rhs1 = rusanov_rhs(grid, &stage, &prims1);
        let second = apply(&stage, &rhs1, dt, grid, source, t + dt);
        let mut full = u.clone();
        for k in 0..full.rho.len() {
            full.rho[k] = 0.5 * (u.rho[k] + second.rho[k]);
            full.mx[k] = 0.5 * (u.mx[k] + second.mx[k]);
            full.my[k] = 0.5 * (u.my[k] + second.my[k]);
            full.e[k] = 0.5 * (u.e[k] + second.e[k]);
        }
            if full.rho.iter().all(|&r| r >= 0.0) {
            clamps += c;
            candidate = Some(full);
        }
    }
    let fallback = candidate.is_none();
    let mut next = candidate.unwrap_or(stage);
    for r in next.rho.iter_mut() {
        if *r < 0.0 {
            *r = 0.0;
        }
    }
    vacuum_rule(&mut next);
    *u = next;
    TransportOutcome { fallback, clamps }
}
