//! Per-window energy ledger of the coupled scheme.
//!
//! The telescoped balance reads
//! `E_f + E_s + λ∫∫ϑ⁵ + shell dissipation + cross penalties + last fluid self-penalty ≤ E₀`,
//! where the self-penalties of one sub-problem pay for the lagged inputs of the other.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Column names of `ledger.csv`, in order.
pub const LEDGER_COLUMNS: [&str; 28] = [
    "window",
    "time",
    "fluid_kinetic",
    "fluid_internal",
    "fluid_artificial",
    "radiation_cum",
    "shell_kinetic",
    "shell_bending",
    "shell_rotational",
    "shell_thermal",
    "shell_visc_diss_cum",
    "shell_heat_diss_cum",
    "pen_fluid_v_cum",
    "pen_fluid_t_cum",
    "pen_shell_v_cum",
    "pen_shell_t_cum",
    "penalty_last_window",
    "lhs_total",
    "e0",
    "slack",
    "exterior_mass",
    "radiation_exterior_cum",
    "viscous_diss_cum",
    "viscous_diss_exterior_cum",
    "entropy_production_cum",
    "min_shell_theta",
    "clamp_events",
    "clamp_energy_cum",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerRow {
    pub window: usize,
    pub time: f64,
    pub fluid_kinetic: f64,
    pub fluid_internal: f64,
    pub fluid_artificial: f64,
    pub radiation_cum: f64,
    pub shell_kinetic: f64,
    pub shell_bending: f64,
    pub shell_rotational: f64,
    pub shell_thermal: f64,
    pub shell_visc_diss_cum: f64,
    pub shell_heat_diss_cum: f64,
    pub pen_fluid_v_cum: f64,
    pub pen_fluid_t_cum: f64,
    pub pen_shell_v_cum: f64,
    pub pen_shell_t_cum: f64,
    pub penalty_last_window: f64,
    pub lhs_total: f64,
    pub e0: f64,
    pub slack: f64,
    pub exterior_mass: f64,
    pub radiation_exterior_cum: f64,
    pub viscous_diss_cum: f64,
    pub viscous_diss_exterior_cum: f64,
    pub entropy_production_cum: f64,
    pub min_shell_theta: f64,
    pub clamp_events: usize,
    /// Energy added by temperature-floor fix-ups; informational, not part of the balance.
    pub clamp_energy_cum: f64,
}

impl LedgerRow {
    fn values(&self) -> [f64; 28] {
        [
            self.window as f64,
            self.time,
            self.fluid_kinetic,
            self.fluid_internal,
            self.fluid_artificial,
            self.radiation_cum,
            self.shell_kinetic,
            self.shell_bending,
            self.shell_rotational,
            self.shell_thermal,
            self.shell_visc_diss_cum,
            self.shell_heat_diss_cum,
            self.pen_fluid_v_cum,
            self.pen_fluid_t_cum,
            self.pen_shell_v_cum,
            self.pen_shell_t_cum,
            self.penalty_last_window,
            self.lhs_total,
            self.e0,
            self.slack,
            self.exterior_mass,
            self.radiation_exterior_cum,
            self.viscous_diss_cum,
            self.viscous_diss_exterior_cum,
            self.entropy_production_cum,
            self.min_shell_theta,
            self.clamp_events as f64,
            self.clamp_energy_cum,
        ]
    }

    fn from_values(v: &[f64]) -> Self {
        LedgerRow {
            window: v[0] as usize,
            time: v[1],
            fluid_kinetic: v[2],
            fluid_internal: v[3],
            fluid_artificial: v[4],
            radiation_cum: v[5],
            shell_kinetic: v[6],
            shell_bending: v[7],
            shell_rotational: v[8],
            shell_thermal: v[9],
            shell_visc_diss_cum: v[10],
            shell_heat_diss_cum: v[11],
            pen_fluid_v_cum: v[12],
            pen_fluid_t_cum: v[13],
            pen_shell_v_cum: v[14],
            pen_shell_t_cum: v[15],
            penalty_last_window: v[16],
            lhs_total: v[17],
            e0: v[18],
            slack: v[19],
            exterior_mass: v[20],
            radiation_exterior_cum: v[21],
            viscous_diss_cum: v[22],
            viscous_diss_exterior_cum: v[23],
            entropy_production_cum: v[24],
            min_shell_theta: v[25],
            clamp_events: v[26] as usize,
            clamp_energy_cum: v[27],
        }
    }

    /// Sum of the terms bounded by E₀.
    pub fn recompute_lhs(&self) -> f64 {
        self.fluid_kinetic
            + self.fluid_internal
            + self.fluid_artificial
            + self.radiation_cum
            + self.shell_kinetic
            + self.shell_bending
            + self.shell_rotational
            + self.shell_thermal
            + self.shell_visc_diss_cum
            + self.shell_heat_diss_cum
            + self.pen_fluid_v_cum
            + self.pen_fluid_t_cum
            + self.pen_shell_v_cum
            + self.pen_shell_t_cum
            + self.penalty_last_window
    }

    pub fn fluid_total(&self) -> f64 {
        self.fluid_kinetic + self.fluid_internal + self.fluid_artificial
    }

    pub fn shell_total(&self) -> f64 {
        self.shell_kinetic + self.shell_bending + self.shell_rotational + self.shell_thermal
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

/// Outcome of re-validating a ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerCheck {
    pub rows: usize,
    /// Most negative slack relative to E₀.
    pub worst_relative_slack: f64,
    /// Largest mismatch between a stored total and the sum of its columns, relative to E₀.
    pub worst_column_mismatch: f64,
    pub failures: Vec<String>,
}

impl LedgerCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Default slack tolerance relative to E₀.
pub const SLACK_TOL: f64 = 1e-8;

impl EnergyLedger {
    pub fn push(&mut self, row: LedgerRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    pub fn min_relative_slack(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.slack / r.e0.abs().max(f64::MIN_POSITIVE))
            .fold(f64::INFINITY, f64::min)
    }

    /// Slack ≥ −tol·E₀ on every row, totals consistent with their columns to 1e-12·E₀, and
    /// cumulative columns non-decreasing.
    pub fn check(&self, tol: f64) -> LedgerCheck {
        let mut failures = Vec::new();
        let mut worst_slack = f64::INFINITY;
        let mut worst_mismatch = 0.0f64;
        let mut prev: Option<&LedgerRow> = None;
        for r in &self.rows {
            let scale = r.e0.abs().max(f64::MIN_POSITIVE);
            let rel = r.slack / scale;
            worst_slack = worst_slack.min(rel);
            if rel < -tol {
                failures.push(format!("window {}: slack {:.3e} below -{tol:e}·E0", r.window, r.slack));
            }
            let lhs_mismatch = (r.recompute_lhs() - r.lhs_total).abs() / scale;
            let slack_mismatch = ((r.e0 - r.lhs_total) - r.slack).abs() / scale;
            worst_mismatch = worst_mismatch.max(lhs_mismatch).max(slack_mismatch);
            if lhs_mismatch > 1e-12 || slack_mismatch > 1e-12 {
                failures.push(format!("window {}: totals inconsistent with columns", r.window));
            }
            if let Some(p) = prev {
                let cums = [
                    (p.radiation_cum, r.radiation_cum, "radiation_cum"),
                    (p.shell_visc_diss_cum, r.shell_visc_diss_cum, "shell_visc_diss_cum"),
                    (p.shell_heat_diss_cum, r.shell_heat_diss_cum, "shell_heat_diss_cum"),
                    (p.pen_fluid_v_cum, r.pen_fluid_v_cum, "pen_fluid_v_cum"),
                    (p.pen_fluid_t_cum, r.pen_fluid_t_cum, "pen_fluid_t_cum"),
                    (p.pen_shell_v_cum, r.pen_shell_v_cum, "pen_shell_v_cum"),
                    (p.pen_shell_t_cum, r.pen_shell_t_cum, "pen_shell_t_cum"),
                ];
                for (a, b, name) in cums {
                    if b < a {
                        failures.push(format!("window {}: cumulative column {name} decreased", r.window));
                    }
                }
                if r.window != p.window + 1 {
                    failures.push(format!("window index jumps from {} to {}", p.window, r.window));
                }
            }
            prev = Some(r);
        }
        LedgerCheck {
            rows: self.rows.len(),
            worst_relative_slack: if self.rows.is_empty() { 0.0 } else { worst_slack },
            worst_column_mismatch: worst_mismatch,
            failures,
        }
    }

    /// CSV text with the documented column order. Floats use Rust's shortest round-trip
    /// representation so that parsing restores them bit for bit.
    pub fn to_csv(&self) -> String {
        let mut s = LEDGER_COLUMNS.join(",");
        s.push('\n');
        for r in &self.rows {
            let vals = r.values();
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                if i == 0 || i == 26 {
                    let _ = write!(s, "{}", *v as usize);
                } else {
                    let _ = write!(s, "{v:?}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
        if header != LEDGER_COLUMNS.join(",") {
            return Err(Error::Config { line: 1, message: "ledger header does not match the documented columns".into() });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::Config { line: i + 1, message: format!("malformed number: {e}") })?;
            if vals.len() != LEDGER_COLUMNS.len() {
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("expected {} columns, found {}", LEDGER_COLUMNS.len(), vals.len()),
                });
            }
            rows.push(LedgerRow::from_values(&vals));
        }
        Ok(EnergyLedger { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(window: usize, slack: f64) -> LedgerRow {
        let mut r = LedgerRow { window, time: window as f64 * 0.1, fluid_internal: 1.0, e0: 1.0 + slack, ..Default::default() };
        r.lhs_total = r.recompute_lhs();
        r.slack = r.e0 - r.lhs_total;
        r
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut l = EnergyLedger::default();
        l.push(row(0, 0.0));
        l.push(LedgerRow { fluid_kinetic: 0.1 + 0.2, ..row(1, 1e-3) });
        let back = EnergyLedger::from_csv(&l.to_csv()).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn negative_slack_is_flagged() {
        let mut l = EnergyLedger::default();
        l.push(row(0, 0.0));
        l.push(row(1, -1e-3));
        let c = l.check(SLACK_TOL);
        assert!(!c.passed());
        assert!(c.worst_relative_slack < -1e-4);
    }
}
