//! Extension of the fluid problem to the fixed box B: degraded coefficients outside the
//! deformed domain, artificial pressure, and extended initial data.

use rayon::prelude::*;

use crate::constitutive::GasModel;
use crate::error::{Error, Result};
use crate::geometry::{DisplacementSample, ReferenceGeometry};
use crate::grid::Grid;

/// Approximation parameters (Δt, δ, β, k); η = k⁸, ω = ν = k², λ = k are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxParams {
    pub dt: f64,
    pub delta: f64,
    pub beta: f64,
    pub k: f64,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams { dt: 1.0 / 32.0, delta: 0.1, beta: 4.0, k: 0.5 }
    }
}

impl ApproxParams {
    /// Radiation floor η = k⁸.
    pub fn eta(&self) -> f64 {
        self.k.powi(8)
    }
    /// Viscosity floor ω = k².
    pub fn omega(&self) -> f64 {
        self.k * self.k
    }
    /// Conductivity floor ν = k².
    pub fn nu(&self) -> f64 {
        self.k * self.k
    }
    /// Radiation sink coefficient λ = k.
    pub fn lambda(&self) -> f64 {
        self.k
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Validation(format!("approx.dt = {} must be positive", self.dt)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Validation(format!("approx.delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.beta >= 4.0) {
            return Err(Error::Validation(format!("approx.beta = {} must be at least 4", self.beta)));
        }
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(Error::Validation(format!("approx.k = {} must lie in (0, 1]", self.k)));
        }
        Ok(())
    }
}

/// Grid-sampled extension masks for one window.
#[derive(Debug, Clone)]
pub struct CoefficientFields {
    pub f_omega: Vec<f64>,
    pub chi_nu: Vec<f64>,
    pub chi_eta: Vec<f64>,
    pub interior: Vec<bool>,
}

impl CoefficientFields {
    /// All masks equal to 1 (no extension).
    pub fn uniform(grid: &Grid) -> Self {
        let n = grid.len();
        CoefficientFields {
            f_omega: vec![1.0; n],
            chi_nu: vec![1.0; n],
            chi_eta: vec![1.0; n],
            interior: vec![true; n],
        }
    }
}

/// Cosine ramp from 1 (at `s ≤ 0`) to `floor` (at `s ≥ width`).
#[inline]
pub fn ramp_mask(s: f64, width: f64, floor: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= width {
        floor
    } else {
        floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * s / width).cos())
    }
}

/// Samples the masks at cell centres: 1 inside Ω^w, a cosine ramp over `band_cells`
/// cells just outside ∂Ω^w, and the floors (ω, ν, η) beyond.
pub fn build_coefficient_fields(
    geometry: &ReferenceGeometry,
    w: &DisplacementSample,
    params: &ApproxParams,
    grid: &Grid,
    band_cells: f64,
) -> Result<CoefficientFields> {
    let inj = geometry.check_injectivity(w);
    if !inj.injective {
        return Err(Error::Degeneracy(format!(
            "cannot build coefficient fields: displacement leaves the tube (margin {})",
            inj.margin
        )));
    }
    let width = band_cells * grid.h();
    let (omega, nu, eta) = (params.omega(), params.nu(), params.eta());
    let sampled: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.center(k);
            match geometry.offset_from_deformed(w, x) {
                Some(s) => (s, s < 0.0),
                None if geometry.chart.contains(x) => (f64::NEG_INFINITY, true),
                None => (f64::INFINITY, false),
            }
        })
        .collect();
    let mask = |floor: f64| -> Vec<f64> { sampled.iter().map(|(s, _)| ramp_mask(*s, width, floor)).collect() };
    Ok(CoefficientFields {
        f_omega: mask(omega),
        chi_nu: mask(nu),
        chi_eta: mask(eta),
        interior: sampled.iter().map(|(_, inside)| *inside).collect(),
    })
}

fn check_state(rho: f64, theta: f64) -> Result<()> {
    if !(rho >= 0.0) || !(theta >= 0.0) {
        return Err(Error::Domain(format!("state (ρ, ϑ) = ({rho}, {theta}) must be non-negative")));
    }
    Ok(())
}

/// p_{η,δ} = p_M + χ_η (a/3) ϑ⁴ + δ ρ^β.
pub fn extended_pressure(gas: &GasModel, rho: f64, theta: f64, chi_eta: f64, params: &ApproxParams) -> Result<f64> {
    check_state(rho, theta)?;
    Ok(gas.p_molecular(rho, theta) + chi_eta * gas.p_radiative(theta) + params.delta * rho.powf(params.beta))
}

/// ρ e_η = ρ e_M + χ_η a ϑ⁴.
pub fn extended_rho_e(gas: &GasModel, rho: f64, theta: f64, chi_eta: f64) -> Result<f64> {
    check_state(rho, theta)?;
    Ok(gas.rho_e_molecular(rho, theta) + chi_eta * gas.a * theta.powi(4))
}

/// ρ s_η = ρ s_M + χ_η (4/3) a ϑ³ (molecular part extended by 0 at ρ = 0).
pub fn extended_rho_s(gas: &GasModel, rho: f64, theta: f64, chi_eta: f64) -> Result<f64> {
    check_state(rho, theta)?;
    if theta == 0.0 && rho > 0.0 {
        return Err(Error::Domain("entropy diverges at ϑ = 0 for positive density".into()));
    }
    Ok(gas.rho_s_molecular(rho, theta) + chi_eta * gas.rho_s_radiative(theta))
}

/// Artificial-pressure energy δ ρ^β / (β − 1).
#[inline]
pub fn artificial_energy(rho: f64, params: &ApproxParams) -> f64 {
    params.delta * rho.max(0.0).powf(params.beta) / (params.beta - 1.0)
}

/// Default exterior temperature ϑ̲.
pub const EXTERIOR_THETA: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ExtendedInitialData {
    pub rho: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
    pub theta: Vec<f64>,
    /// ∫ δ ρ^β over B.
    pub artificial_integral: f64,
}

/// Extends initial data given on the cells of Ω^{w₀} to the whole box.
#[allow(clippy::too_many_arguments)]
pub fn extend_initial_data(
    grid: &Grid,
    interior: &[bool],
    rho0: &[f64],
    mx0: &[f64],
    my0: &[f64],
    theta0: &[f64],
    params: &ApproxParams,
    theta_exterior: f64,
) -> Result<ExtendedInitialData> {
    let n = grid.len();
    for (name, len) in [
        ("interior", interior.len()),
        ("rho", rho0.len()),
        ("mx", mx0.len()),
        ("my", my0.len()),
        ("theta", theta0.len()),
    ] {
        if len != n {
            return Err(Error::Validation(format!("initial field {name} has {len} cells, expected {n}")));
        }
    }
    if !(theta_exterior > 0.0) {
        return Err(Error::Validation("exterior temperature must be positive".into()));
    }
    let mut offending = Vec::new();
    for k in 0..n {
        let bad = !rho0[k].is_finite()
            || rho0[k] < 0.0
            || (!interior[k] && rho0[k] != 0.0)
            || (interior[k] && !(theta0[k] > 0.0 && theta0[k].is_finite()))
            || !mx0[k].is_finite()
            || !my0[k].is_finite();
        if bad {
            offending.push(k);
        }
    }
    if !offending.is_empty() {
        let shown: Vec<String> = offending
            .iter()
            .take(10)
            .map(|&k| {
                let (i, j) = grid.ij(k);
                format!("({i},{j})")
            })
            .collect();
        return Err(Error::Validation(format!(
            "{} cells violate the initial-data hypotheses: {}{}",
            offending.len(),
            shown.join(", "),
            if offending.len() > 10 { ", ..." } else { "" }
        )));
    }
    let mut rho = vec![0.0; n];
    let mut mx = vec![0.0; n];
    let mut my = vec![0.0; n];
    let mut theta = vec![theta_exterior; n];
    for k in 0..n {
        if interior[k] {
            rho[k] = rho0[k];
            theta[k] = theta0[k];
            if rho0[k] > 0.0 {
                mx[k] = mx0[k];
                my[k] = my0[k];
            }
        }
    }
    let artificial_integral = grid.integrate_with(|k| params.delta * rho[k].powf(params.beta));
    Ok(ExtendedInitialData { rho, mx, my, theta, artificial_integral })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_floors() {
        let p = ApproxParams { k: 0.5, ..Default::default() };
        assert_eq!((p.omega(), p.nu(), p.eta(), p.lambda()), (0.25, 0.25, 1.0 / 256.0, 0.5));
    }

    #[test]
    fn extended_pressure_examples() {
        let gas = GasModel::default();
        let p = ApproxParams { delta: 0.1, beta: 4.0, ..Default::default() };
        assert!((extended_pressure(&gas, 1.0, 1.0, 1.0, &p).unwrap() - (7.0 / 3.0 + 0.1)).abs() < 1e-14);
        let eta = 1.0 / 256.0;
        assert!((extended_pressure(&gas, 0.0, 1.0, eta, &p).unwrap() - 1.0 / 768.0).abs() < 1e-16);
    }

    #[test]
    fn ramp_is_monotone_between_one_and_floor() {
        let mut last = 1.0;
        for i in 0..=100 {
            let v = ramp_mask(i as f64 * 0.01, 1.0, 0.2);
            assert!(v <= last && v >= 0.2);
            last = v;
        }
    }
}
