//! Thermodynamic state functions, transport coefficients and hypothesis validators.
//!
//! The default gas is the prototype law
//! `p = c1 ρ^γ + c2 ρϑ + (a/3)ϑ⁴`, `e = c1 ρ^{γ-1}/(γ-1) + c_v ϑ + aϑ⁴/ρ`,
//! `s = c_v ln ϑ − c2 ln ρ + 4aϑ³/(3ρ)` with γ = 5/3.

use std::fmt;

use crate::error::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

/// Lower temperature bound applied before logarithms and divisions.
pub const THETA_FLOOR: f64 = 1e-8;

/// Molecular pressure given through a scalar profile: p_M = ϑ^{5/2} P(ρ/ϑ^{3/2}) outside
/// the band `z_lo < Z ≤ z_hi`.
#[derive(Debug, Clone, Copy)]
pub struct GeneralLaw {
    pub profile: fn(f64) -> f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

/// The three scalar state functions that Gibbs' relation ties together.
pub trait StateFunctions {
    fn pressure_of(&self, rho: f64, theta: f64) -> f64;
    fn energy_of(&self, rho: f64, theta: f64) -> f64;
    fn entropy_of(&self, rho: f64, theta: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct GasModel {
    pub c1: f64,
    pub c2: f64,
    pub cv: f64,
    pub a: f64,
    pub gamma: f64,
    pub general: Option<GeneralLaw>,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel { c1: 1.0, c2: 1.0, cv: 1.0, a: 1.0, gamma: 5.0 / 3.0, general: None }
    }
}

fn check_nonneg(rho: f64, theta: f64) -> Result<()> {
    if !(rho >= 0.0) || !(theta >= 0.0) {
        return Err(Error::Domain(format!("state (ρ, ϑ) = ({rho}, {theta}) must be non-negative")));
    }
    Ok(())
}

impl GasModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("cv", self.cv), ("a", self.a)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("gas.{name} = {v} must be non-negative")));
            }
        }
        if !(self.cv > 0.0) {
            return Err(Error::Validation("gas.cv must be positive".into()));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::Validation(format!("gas.gamma = {} must exceed 1", self.gamma)));
        }
        Ok(())
    }

    // Unchecked kernels used in solver hot loops.

    #[inline]
    pub fn p_molecular(&self, rho: f64, theta: f64) -> f64 {
        self.c1 * rho.powf(self.gamma) + self.c2 * rho * theta
    }

    #[inline]
    pub fn p_radiative(&self, theta: f64) -> f64 {
        self.a / 3.0 * theta.powi(4)
    }

    /// ρ·e_M.
    #[inline]
    pub fn rho_e_molecular(&self, rho: f64, theta: f64) -> f64 {
        self.c1 * rho.powf(self.gamma) / (self.gamma - 1.0) + self.cv * rho * theta
    }

    /// e_M (ρ > 0).
    #[inline]
    pub fn e_molecular(&self, rho: f64, theta: f64) -> f64 {
        self.c1 * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0) + self.cv * theta
    }

    /// ρ·s_M, extended by 0 at ρ = 0.
    #[inline]
    pub fn rho_s_molecular(&self, rho: f64, theta: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        rho * (self.cv * theta.max(THETA_FLOOR).ln() - self.c2 * rho.ln())
    }

    /// ρ·s_R = (4/3) a ϑ³, independent of ρ.
    #[inline]
    pub fn rho_s_radiative(&self, theta: f64) -> f64 {
        4.0 / 3.0 * self.a * theta.powi(3)
    }

    /// ∂p_M/∂ρ.
    #[inline]
    pub fn dp_drho(&self, rho: f64, theta: f64) -> f64 {
        self.c1 * self.gamma * rho.max(0.0).powf(self.gamma - 1.0) + self.c2 * theta
    }

    /// ∂p/∂ϑ for radiation weight `chi` (1 for the physical gas).
    #[inline]
    pub fn dp_dtheta(&self, rho: f64, theta: f64, chi: f64) -> f64 {
        self.c2 * rho + 4.0 / 3.0 * chi * self.a * theta.powi(3)
    }

    // Checked public state functions.

    pub fn pressure(&self, rho: f64, theta: f64) -> Result<f64> {
        check_nonneg(rho, theta)?;
        Ok(self.p_molecular(rho, theta) + self.p_radiative(theta))
    }

    /// Specific internal energy e(ρ, ϑ).
    pub fn internal_energy(&self, rho: f64, theta: f64) -> Result<f64> {
        check_nonneg(rho, theta)?;
        if rho == 0.0 {
            return Err(Error::Domain("specific internal energy is undefined at ρ = 0; use rho_e".into()));
        }
        Ok(self.e_molecular(rho, theta) + self.a * theta.powi(4) / rho)
    }

    /// Volumetric internal energy ρe, continuous down to ρ = 0.
    pub fn rho_e(&self, rho: f64, theta: f64) -> Result<f64> {
        check_nonneg(rho, theta)?;
        Ok(self.rho_e_molecular(rho, theta) + self.a * theta.powi(4))
    }

    /// Specific entropy s(ρ, ϑ).
    pub fn entropy(&self, rho: f64, theta: f64) -> Result<f64> {
        if !(rho > 0.0) || !(theta > 0.0) {
            return Err(Error::Domain(format!(
                "specific entropy requires ρ > 0 and ϑ > 0 (got {rho}, {theta})"
            )));
        }
        Ok(self.cv * theta.ln() - self.c2 * rho.ln() + 4.0 * self.a * theta.powi(3) / (3.0 * rho))
    }

    /// Volumetric entropy ρs = ρ s_M + (4/3) a ϑ³; the molecular part extends by 0 at ρ = 0.
    pub fn rho_s(&self, rho: f64, theta: f64) -> Result<f64> {
        check_nonneg(rho, theta)?;
        if theta == 0.0 && rho > 0.0 {
            return Err(Error::Domain("entropy diverges at ϑ = 0 for positive density".into()));
        }
        Ok(self.rho_s_molecular(rho, theta) + self.rho_s_radiative(theta))
    }

    /// Heat capacity ∂(ρe)/∂ϑ at fixed ρ, radiation weighted by `chi`.
    #[inline]
    pub fn heat_capacity(&self, rho: f64, theta: f64, chi: f64) -> f64 {
        self.cv * rho + 4.0 * chi * self.a * theta.powi(3)
    }

    /// Inverts ρe(ρ, ϑ) = `rho_e` for ϑ with radiation weight `chi` (Newton, monotone).
    /// Returns `(ϑ, clamped)` where `clamped` flags that the floor was hit.
    pub fn temperature_from_energy(&self, rho: f64, rho_e: f64, chi: f64, floor: f64, guess: f64) -> (f64, bool) {
        let cold = self.c1 * rho.max(0.0).powf(self.gamma) / (self.gamma - 1.0);
        let thermal = rho_e - cold;
        let g = |t: f64| self.cv * rho * t + chi * self.a * t.powi(4);
        if thermal <= g(floor) {
            return (floor, thermal < g(floor) * (1.0 - 1e-12) - 1e-300);
        }
        // Bracket [lo, hi] with g(lo) ≤ thermal ≤ g(hi).
        let mut lo = floor;
        let mut hi = if self.cv * rho > 0.0 { thermal / (self.cv * rho) } else { f64::INFINITY };
        if chi * self.a > 0.0 {
            hi = hi.min((thermal / (chi * self.a)).powf(0.25));
        }
        if !hi.is_finite() {
            return (floor, true);
        }
        let mut t = if guess.is_finite() && guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
        for _ in 0..100 {
            let r = g(t) - thermal;
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let dr = self.heat_capacity(rho, t, chi);
            let mut next = t - r / dr;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t.max(1e-300) {
                t = next;
                break;
            }
            t = next;
        }
        (t, false)
    }
}

impl StateFunctions for GasModel {
    fn pressure_of(&self, rho: f64, theta: f64) -> f64 {
        self.p_molecular(rho, theta) + self.p_radiative(theta)
    }
    fn energy_of(&self, rho: f64, theta: f64) -> f64 {
        self.e_molecular(rho, theta) + self.a * theta.powi(4) / rho
    }
    fn entropy_of(&self, rho: f64, theta: f64) -> f64 {
        self.cv * theta.ln() - self.c2 * rho.ln() + 4.0 * self.a * theta.powi(3) / (3.0 * rho)
    }
}

/// Both partial residuals of Gibbs' relation ϑDs = De + pD(1/ρ) by fourth-order central
/// differences with relative step `h`. Returns the larger absolute residual.
pub fn gibbs_residual<M: StateFunctions>(model: &M, rho: f64, theta: f64, h: f64) -> f64 {
    let (rt, rr, _, _) = gibbs_parts(model, rho, theta, h);
    rt.abs().max(rr.abs())
}

/// As [`gibbs_residual`] but each partial is normalised by the magnitude of its terms.
pub fn gibbs_relative_residual<M: StateFunctions>(model: &M, rho: f64, theta: f64, h: f64) -> f64 {
    let (rt, rr, st, sr) = gibbs_parts(model, rho, theta, h);
    (rt.abs() / st.max(f64::MIN_POSITIVE)).max(rr.abs() / sr.max(f64::MIN_POSITIVE))
}

fn gibbs_parts<M: StateFunctions>(model: &M, rho: f64, theta: f64, h: f64) -> (f64, f64, f64, f64) {
    // Fourth-order central differences keep truncation and round-off both small for h ~ 1e-3.
    let d = |f: &dyn Fn(f64) -> f64, x: f64| {
        let dx = h * x;
        (8.0 * (f(x + dx) - f(x - dx)) - (f(x + 2.0 * dx) - f(x - 2.0 * dx))) / (12.0 * dx)
    };
    let s_t = d(&|t| model.entropy_of(rho, t), theta);
    let e_t = d(&|t| model.energy_of(rho, t), theta);
    let s_r = d(&|r| model.entropy_of(r, theta), rho);
    let e_r = d(&|r| model.energy_of(r, theta), rho);
    let p_term = model.pressure_of(rho, theta) / (rho * rho);
    let res_t = theta * s_t - e_t;
    let res_r = theta * s_r - e_r + p_term;
    (res_t, res_r, (theta * s_t).abs() + e_t.abs(), (theta * s_r).abs() + e_r.abs() + p_term.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportModel {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub zeta_lo: f64,
    pub zeta_hi: f64,
    pub kappa_m_lo: f64,
    pub kappa_m_hi: f64,
    pub kappa_r_lo: f64,
    pub kappa_r_hi: f64,
}

impl Default for TransportModel {
    fn default() -> Self {
        TransportModel {
            mu_lo: 1.0,
            mu_hi: 1.0,
            zeta_lo: 1.0,
            zeta_hi: 1.0,
            kappa_m_lo: 1.0,
            kappa_m_hi: 1.0,
            kappa_r_lo: 1.0,
            kappa_r_hi: 1.0,
        }
    }
}

impl TransportModel {
    /// Each coefficient sits at the midpoint of its admissible band.
    #[inline]
    pub fn mu(&self, theta: f64) -> f64 {
        0.5 * (self.mu_lo + self.mu_hi) * (1.0 + theta)
    }

    #[inline]
    pub fn zeta(&self, theta: f64) -> f64 {
        0.5 * (self.zeta_lo + self.zeta_hi) * (1.0 + theta)
    }

    #[inline]
    pub fn kappa_m(&self, theta: f64) -> f64 {
        0.5 * (self.kappa_m_lo + self.kappa_m_hi) * (1.0 + theta)
    }

    #[inline]
    pub fn kappa_r(&self, theta: f64) -> f64 {
        0.5 * (self.kappa_r_lo + self.kappa_r_hi) * (1.0 + theta.powi(3))
    }

    #[inline]
    pub fn kappa(&self, theta: f64) -> f64 {
        self.kappa_m(theta) + self.kappa_r(theta)
    }

    /// dκ/dϑ.
    #[inline]
    pub fn kappa_prime(&self, theta: f64) -> f64 {
        0.5 * (self.kappa_m_lo + self.kappa_m_hi) + 1.5 * (self.kappa_r_lo + self.kappa_r_hi) * theta * theta
    }

    /// Bound m̄ on |μ'|.
    pub fn mu_slope_bound(&self) -> f64 {
        self.mu_hi
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi) in self.pairs() {
            if !(lo > 0.0) || !(lo <= hi) {
                return Err(Error::Validation(format!(
                    "transport bounds for {name} must satisfy 0 < lower <= upper (got {lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    fn pairs(&self) -> [(&'static str, f64, f64); 4] {
        [
            ("mu", self.mu_lo, self.mu_hi),
            ("zeta", self.zeta_lo, self.zeta_hi),
            ("kappa_m", self.kappa_m_lo, self.kappa_m_hi),
            ("kappa_r", self.kappa_r_lo, self.kappa_r_hi),
        ]
    }
}

/// S = μ(∇u + ∇ᵀu − (2/3) div u I) + ζ div u I.
pub fn stress_tensor(transport: &TransportModel, theta: f64, grad_u: Mat2) -> Mat2 {
    stress_with(transport.mu(theta), transport.zeta(theta), grad_u)
}

#[inline]
pub fn stress_with(mu: f64, zeta: f64, g: Mat2) -> Mat2 {
    let div = g[0][0] + g[1][1];
    let off = mu * (g[0][1] + g[1][0]);
    [
        [mu * (2.0 * g[0][0] - 2.0 / 3.0 * div) + zeta * div, off],
        [off, mu * (2.0 * g[1][1] - 2.0 / 3.0 * div) + zeta * div],
    ]
}

/// S:∇u for the stress with coefficients (μ, ζ).
#[inline]
pub fn viscous_dissipation(mu: f64, zeta: f64, g: Mat2) -> f64 {
    let div = g[0][0] + g[1][1];
    let shear = g[0][1] + g[1][0];
    let d2 = g[0][0] * g[0][0] + g[1][1] * g[1][1] + 0.5 * shear * shear;
    mu * (2.0 * d2 - 2.0 / 3.0 * div * div) + zeta * div * div
}

/// q = −κ(ϑ)∇ϑ.
pub fn heat_flux(transport: &TransportModel, theta: f64, grad_theta: [f64; 2]) -> [f64; 2] {
    let k = transport.kappa(theta);
    [-k * grad_theta[0], -k * grad_theta[1]]
}

/// σ = (1/ϑ)(S:∇u + κ|∇ϑ|²/ϑ).
pub fn entropy_production(
    transport: &TransportModel,
    theta: f64,
    grad_u: Mat2,
    grad_theta: [f64; 2],
) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("entropy production requires ϑ > 0 (got {theta})")));
    }
    let visc = viscous_dissipation(transport.mu(theta), transport.zeta(theta), grad_u);
    let g2 = grad_theta[0] * grad_theta[0] + grad_theta[1] * grad_theta[1];
    Ok((visc + transport.kappa(theta) * g2 / theta) / theta)
}

/// Logarithmically spaced samples on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst-case margin (positive when satisfied) or the empirical constant for sup-type checks.
    pub margin: f64,
    pub detail: String,
    /// Informational checks are reported but excluded from [`HypothesisReport::all_pass`].
    pub informational: bool,
}

#[derive(Debug, Clone, Default)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().filter(|c| !c.informational).all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match (c.passed, c.informational) {
                (true, _) => "PASS",
                (false, true) => "INFO",
                (false, false) => "FAIL",
            };
            writeln!(f, "{tag:4} {:<10} margin={:<14.6e} {}", c.name, c.margin, c.detail)?;
        }
        write!(f, "overall: {}", if self.all_pass() { "PASS" } else { "FAIL" })
    }
}

/// Relative finite-difference step used by the validator's Gibbs check.
pub const GIBBS_STEP: f64 = 1e-3;

/// Gibbs tolerance used by the validator (relative).
pub const GIBBS_TOL: f64 = 1e-7;

/// Samples every hypothesis on the tensor grid `rhos × thetas`.
pub fn validate_hypotheses(
    gas: &GasModel,
    transport: &TransportModel,
    rhos: &[f64],
    thetas: &[f64],
) -> HypothesisReport {
    let mut report = HypothesisReport::default();
    let fd = 1e-6;

    // ∂p_M/∂ρ > 0.
    let mut worst = f64::INFINITY;
    let mut at = (0.0, 0.0);
    for &r in rhos {
        for &t in thetas {
            let h = fd * r;
            let d = (gas.p_molecular(r + h, t) - gas.p_molecular(r - h, t)) / (2.0 * h);
            if d < worst {
                worst = d;
                at = (r, t);
            }
        }
    }
    report.checks.push(HypothesisCheck {
        name: "pm_1",
        passed: worst > 0.0,
        margin: worst,
        detail: format!("min dp_M/drho at (rho, theta) = ({:.3e}, {:.3e})", at.0, at.1),
        informational: false,
    });

    // 0 < ∂e_M/∂ϑ ≤ c.
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &r in rhos {
        for &t in thetas {
            let h = fd * t;
            let d = (gas.e_molecular(r, t + h) - gas.e_molecular(r, t - h)) / (2.0 * h);
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    report.checks.push(HypothesisCheck {
        name: "em1",
        passed: lo > 0.0 && hi.is_finite(),
        margin: lo,
        detail: format!("de_M/dtheta in [{lo:.6e}, {hi:.6e}]; empirical c = {hi:.6e}"),
        informational: false,
    });

    // lim_{ϑ→0} e_M(ρ, ϑ) > 0.
    let limit = rhos.iter().map(|&r| gas.e_molecular(r, 0.0)).fold(f64::INFINITY, f64::min);
    report.checks.push(HypothesisCheck {
        name: "em2",
        passed: limit > 0.0,
        margin: limit,
        detail: "min over rho of e_M(rho, 0+)".into(),
        informational: false,
    });

    // |ρ ∂e_M/∂ρ| ≤ c e_M.
    let mut sup = 0.0f64;
    for &r in rhos {
        for &t in thetas {
            let h = fd * r;
            let d = (gas.e_molecular(r + h, t) - gas.e_molecular(r - h, t)) / (2.0 * h);
            let e = gas.e_molecular(r, t);
            let ratio = if e > 0.0 { (r * d).abs() / e } else { f64::INFINITY };
            sup = sup.max(ratio);
        }
    }
    report.checks.push(HypothesisCheck {
        name: "em3",
        passed: sup.is_finite(),
        margin: sup,
        detail: format!("empirical c = sup |rho de_M/drho| / e_M = {sup:.6e}"),
        informational: false,
    });

    // Gibbs relation.
    let mut worst_gibbs = 0.0f64;
    for &r in rhos {
        for &t in thetas {
            worst_gibbs = worst_gibbs.max(gibbs_relative_residual(gas, r, t, GIBBS_STEP));
        }
    }
    report.checks.push(HypothesisCheck {
        name: "gibbs",
        passed: worst_gibbs <= GIBBS_TOL,
        margin: GIBBS_TOL - worst_gibbs,
        detail: format!("max relative residual {worst_gibbs:.3e}"),
        informational: false,
    });

    // P-representation of the molecular pressure and the degenerate-region closure.
    let (profile, z_lo, z_hi): (Box<dyn Fn(f64) -> f64>, f64, f64) = match gas.general {
        Some(law) => (Box::new(law.profile), law.z_lo, law.z_hi),
        None => {
            let g = *gas;
            (Box::new(move |z: f64| g.c1 * z.powf(5.0 / 3.0) + g.c2 * z), 0.1, 10.0)
        }
    };
    let p0 = profile(0.0);
    let dp0 = (profile(1e-7) - p0) / 1e-7;
    let mut mismatch = 0.0f64;
    let mut closure = 0.0f64;
    for &r in rhos {
        for &t in thetas {
            let z = r / t.powf(1.5);
            if z <= z_lo || z > z_hi {
                let rep = t.powf(2.5) * profile(z);
                let pm = gas.p_molecular(r, t);
                mismatch = mismatch.max((rep - pm).abs() / pm.abs().max(f64::MIN_POSITIVE));
            }
            if z > z_hi {
                let pm = gas.p_molecular(r, t);
                let alt = (gas.gamma - 1.0) * gas.rho_e_molecular(r, t);
                closure = closure.max((alt - pm).abs() / pm.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    report.checks.push(HypothesisCheck {
        name: "pm2",
        passed: p0 == 0.0 && dp0 > 0.0 && mismatch <= 1e-10,
        margin: mismatch,
        detail: format!("P(0) = {p0:.3e}, P'(0) ~ {dp0:.3e}, max relative mismatch {mismatch:.3e}"),
        informational: true,
    });
    report.checks.push(HypothesisCheck {
        name: "pm3",
        passed: closure <= 1e-10,
        margin: closure,
        detail: format!("max relative deviation of p_M from (gamma-1) rho e_M for Z > {z_hi}: {closure:.3e}"),
        informational: true,
    });

    // Transport bounds.
    let mut transport_ok = transport.validate().is_ok();
    let mut transport_margin = f64::INFINITY;
    for &t in thetas {
        let samples = [
            (transport.mu(t), transport.mu_lo * (1.0 + t), transport.mu_hi * (1.0 + t)),
            (transport.zeta(t), transport.zeta_lo * (1.0 + t), transport.zeta_hi * (1.0 + t)),
            (transport.kappa_m(t), transport.kappa_m_lo * (1.0 + t), transport.kappa_m_hi * (1.0 + t)),
            (
                transport.kappa_r(t),
                transport.kappa_r_lo * (1.0 + t.powi(3)),
                transport.kappa_r_hi * (1.0 + t.powi(3)),
            ),
        ];
        for (v, lo, hi) in samples {
            let tol = 1e-14 * hi.abs().max(1.0);
            let m = (v - lo).min(hi - v);
            transport_margin = transport_margin.min(m / hi.max(f64::MIN_POSITIVE));
            if v < lo - tol || v > hi + tol {
                transport_ok = false;
            }
        }
    }
    let slope = 0.5 * (transport.mu_lo + transport.mu_hi);
    if slope > transport.mu_slope_bound() + 1e-14 {
        transport_ok = false;
    }
    report.checks.push(HypothesisCheck {
        name: "transport",
        passed: transport_ok,
        margin: transport_margin,
        detail: if transport.validate().is_ok() {
            format!("coefficients inside their bands; |mu'| = {slope:.3e}")
        } else {
            "lower bound exceeds upper bound".into()
        },
        informational: false,
    });

    report
}
