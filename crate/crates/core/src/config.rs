//! Line-oriented run configuration (`section.key = value`, `#` comments) with documented
//! defaults, an effective-config echo, and construction of the splitting problem.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{GasModel, TransportModel};
use crate::coupling::{CouplingParams, SplittingProblem, TraceSampling};
use crate::error::{Error, Result};
use crate::extension::{build_coefficient_fields, extend_initial_data, ApproxParams};
use crate::fluid::{FluidModel, FluidParams, FluidState};
use crate::geometry::{Chart, DisplacementSample, ReferenceGeometry};
use crate::grid::Grid;
use crate::structure::{ShellParams, ShellState};

/// (key, default, description) of every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("geometry.chart", "circle", "reference curve: circle or ellipse"),
    ("geometry.radius", "1.0", "circle radius"),
    ("geometry.semi_axis_x", "1.0", "ellipse semi-axis along x"),
    ("geometry.semi_axis_y", "0.8", "ellipse semi-axis along y"),
    ("geometry.a", "-0.5", "inner tube bound a (< 0)"),
    ("geometry.b", "0.5", "outer tube bound b (> 0)"),
    ("geometry.half_width", "2.0", "half-width of the box B = [-L, L]^2"),
    ("geometry.n_gamma", "128", "interface nodes"),
    ("grid.n", "64", "fluid cells per direction"),
    ("gas.c1", "1.0", "cold pressure coefficient"),
    ("gas.c2", "1.0", "thermal pressure coefficient"),
    ("gas.cv", "1.0", "heat capacity at constant volume"),
    ("gas.a", "1.0", "radiation constant"),
    ("gas.gamma", "1.6666666666666667", "adiabatic exponent of the cold pressure"),
    ("transport.mu_lo", "1.0", "lower viscosity bound"),
    ("transport.mu_hi", "1.0", "upper viscosity bound"),
    ("transport.zeta_lo", "1.0", "lower bulk-viscosity bound"),
    ("transport.zeta_hi", "1.0", "upper bulk-viscosity bound"),
    ("transport.kappa_m_lo", "1.0", "lower molecular conductivity bound"),
    ("transport.kappa_m_hi", "1.0", "upper molecular conductivity bound"),
    ("transport.kappa_r_lo", "1.0", "lower radiative conductivity bound"),
    ("transport.kappa_r_hi", "1.0", "upper radiative conductivity bound"),
    ("approx.dt", "0.03125", "splitting window length"),
    ("approx.delta", "0.1", "penalty / artificial pressure strength"),
    ("approx.beta", "4.0", "artificial pressure exponent"),
    ("approx.k", "0.5", "extension parameter (eta = k^8, omega = nu = k^2, lambda = k)"),
    ("shell.alpha1", "0.1", "viscoelastic damping"),
    ("shell.alpha2", "0.0", "rotational inertia"),
    ("shell.modes", "32", "highest Fourier mode"),
    ("shell.substeps", "8", "midpoint substeps per window"),
    ("shell.stiffness", "1.0", "bending stiffness multiplier"),
    ("shell.thermal_coupling", "true", "couple the shell temperature equation"),
    ("fluid.cfl", "0.4", "CFL number"),
    ("fluid.kernel_radius", "2.0", "penalty kernel radius in cells"),
    ("fluid.theta_floor", "1e-8", "temperature floor"),
    ("fluid.max_substeps", "20000", "sub-step cap per window"),
    ("fluid.pcg_tol", "1e-10", "relative tolerance of the linear solves"),
    ("fluid.newton_iters", "4", "Newton iterations of the conduction step"),
    ("coupling.trace_sampling", "average", "lagged fluid trace: final or average"),
    ("coupling.band_cells", "2.0", "width of the mask transition band in cells"),
    ("coupling.margin_cells", "1.0", "degeneracy margin in cells"),
    ("initial.rho_center", "1.0", "central density"),
    ("initial.rho_radius", "0.7", "radius of the density bump"),
    ("initial.rho_ambient", "0.0", "density added everywhere inside the domain"),
    ("initial.theta", "0.5", "fluid temperature inside the domain"),
    ("initial.theta_bump", "0.1", "amplitude of the central temperature bump"),
    ("initial.theta_exterior", "1e-3", "temperature assigned outside the domain"),
    ("initial.swirl", "0.2", "amplitude of the solid-body swirl inside the bump"),
    ("initial.w_amplitude", "0.0", "initial displacement amplitude"),
    ("initial.w_mode", "2", "Fourier mode of the initial displacement"),
    ("initial.v_amplitude", "0.0", "initial shell velocity amplitude"),
    ("initial.shell_theta", "0.5", "initial shell temperature"),
    ("run.windows", "8", "number of splitting windows"),
    ("run.seed", "0", "seed for randomised initial perturbations"),
    ("run.perturbation", "0.0", "relative amplitude of random initial perturbations"),
    ("output.snapshot_every", "4", "windows between field snapshots (0 disables them)"),
    ("output.store_frames", "true", "keep per-window frames in memory"),
];

fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|k| k.0 == key).map(|k| k.1).expect("documented key")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    Circle,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub rho_center: f64,
    pub rho_radius: f64,
    pub rho_ambient: f64,
    pub theta: f64,
    pub theta_bump: f64,
    pub theta_exterior: f64,
    pub swirl: f64,
    pub w_amplitude: f64,
    pub w_mode: usize,
    pub v_amplitude: f64,
    pub shell_theta: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub chart: ChartKind,
    pub radius: f64,
    pub semi_axes: (f64, f64),
    pub tube: (f64, f64),
    pub half_width: f64,
    pub n_gamma: usize,
    pub grid_n: usize,
    pub gas: GasModel,
    pub transport: TransportModel,
    pub approx: ApproxParams,
    pub shell: ShellParams,
    pub fluid: FluidParams,
    pub coupling: CouplingParams,
    pub initial: InitialConfig,
    pub windows: usize,
    pub seed: u64,
    pub perturbation: f64,
    pub snapshot_every: usize,
    /// Verbatim source text.
    pub source: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

struct Values {
    map: BTreeMap<String, (String, usize)>,
}

impl Values {
    fn raw(&self, key: &str) -> (String, usize) {
        self.map.get(key).cloned().unwrap_or_else(|| (default_of(key).to_string(), 0))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(key);
        v.parse::<T>().map_err(|e| Error::Config { line, message: format!("malformed value '{v}' for {key}: {e}") })
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).1
    }
}

/// Parses `section.key = value` lines. Unknown keys, duplicates and malformed values are
/// reported with their line number; absent keys take their documented defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config { line, message: format!("expected 'section.key = value', found '{content}'") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.iter().any(|k| k.0 == key) {
            return Err(Error::Config { line, message: format!("unknown key '{key}'") });
        }
        if value.is_empty() {
            return Err(Error::Config { line, message: format!("missing value for {key}") });
        }
        if map.insert(key.to_string(), (value.to_string(), line)).is_some() {
            return Err(Error::Config { line, message: format!("duplicate key '{key}'") });
        }
    }
    let v = Values { map };
    let chart = match v.raw("geometry.chart").0.as_str() {
        "circle" => ChartKind::Circle,
        "ellipse" => ChartKind::Ellipse,
        other => {
            return Err(Error::Config {
                line: v.line("geometry.chart"),
                message: format!("unknown chart '{other}' (expected circle or ellipse)"),
            })
        }
    };
    let trace_sampling: TraceSampling = {
        let (s, line) = v.raw("coupling.trace_sampling");
        s.parse().map_err(|m| Error::Config { line, message: m })?
    };
    let approx = ApproxParams {
        dt: v.parse("approx.dt")?,
        delta: v.parse("approx.delta")?,
        beta: v.parse("approx.beta")?,
        k: v.parse("approx.k")?,
    };
    let cfg = RunConfig {
        chart,
        radius: v.parse("geometry.radius")?,
        semi_axes: (v.parse("geometry.semi_axis_x")?, v.parse("geometry.semi_axis_y")?),
        tube: (v.parse("geometry.a")?, v.parse("geometry.b")?),
        half_width: v.parse("geometry.half_width")?,
        n_gamma: v.parse("geometry.n_gamma")?,
        grid_n: v.parse("grid.n")?,
        gas: GasModel {
            c1: v.parse("gas.c1")?,
            c2: v.parse("gas.c2")?,
            cv: v.parse("gas.cv")?,
            a: v.parse("gas.a")?,
            gamma: v.parse("gas.gamma")?,
            general: None,
        },
        transport: TransportModel {
            mu_lo: v.parse("transport.mu_lo")?,
            mu_hi: v.parse("transport.mu_hi")?,
            zeta_lo: v.parse("transport.zeta_lo")?,
            zeta_hi: v.parse("transport.zeta_hi")?,
            kappa_m_lo: v.parse("transport.kappa_m_lo")?,
            kappa_m_hi: v.parse("transport.kappa_m_hi")?,
            kappa_r_lo: v.parse("transport.kappa_r_lo")?,
            kappa_r_hi: v.parse("transport.kappa_r_hi")?,
        },
        approx,
        shell: ShellParams {
            alpha1: v.parse("shell.alpha1")?,
            alpha2: v.parse("shell.alpha2")?,
            delta: approx.delta,
            dt: approx.dt,
            modes: v.parse("shell.modes")?,
            substeps: v.parse("shell.substeps")?,
            stiffness: v.parse("shell.stiffness")?,
            thermal_coupling: v.parse("shell.thermal_coupling")?,
        },
        fluid: FluidParams {
            cfl: v.parse("fluid.cfl")?,
            kernel_radius: v.parse("fluid.kernel_radius")?,
            theta_floor: v.parse("fluid.theta_floor")?,
            max_substeps: v.parse("fluid.max_substeps")?,
            pcg_tol: v.parse("fluid.pcg_tol")?,
            newton_iters: v.parse("fluid.newton_iters")?,
        },
        coupling: CouplingParams {
            trace_sampling,
            band_cells: v.parse("coupling.band_cells")?,
            margin_cells: v.parse("coupling.margin_cells")?,
            store_frames: v.parse("output.store_frames")?,
        },
        initial: InitialConfig {
            rho_center: v.parse("initial.rho_center")?,
            rho_radius: v.parse("initial.rho_radius")?,
            rho_ambient: v.parse("initial.rho_ambient")?,
            theta: v.parse("initial.theta")?,
            theta_bump: v.parse("initial.theta_bump")?,
            theta_exterior: v.parse("initial.theta_exterior")?,
            swirl: v.parse("initial.swirl")?,
            w_amplitude: v.parse("initial.w_amplitude")?,
            w_mode: v.parse("initial.w_mode")?,
            v_amplitude: v.parse("initial.v_amplitude")?,
            shell_theta: v.parse("initial.shell_theta")?,
        },
        windows: v.parse("run.windows")?,
        seed: v.parse("run.seed")?,
        perturbation: v.parse("run.perturbation")?,
        snapshot_every: v.parse("output.snapshot_every")?,
        source: text.to_string(),
    };
    cfg.validate_with(&v)?;
    Ok(cfg)
}

impl RunConfig {
    fn validate_with(&self, v: &Values) -> Result<()> {
        let at = |key: &str, e: Error| -> Error {
            match e {
                Error::Validation(m) if v.line(key) > 0 => Error::Config { line: v.line(key), message: m },
                other => other,
            }
        };
        self.approx.validate().map_err(|e| at("approx.k", e))?;
        self.shell.validate().map_err(|e| at("shell.alpha1", e))?;
        self.fluid.validate().map_err(|e| at("fluid.cfl", e))?;
        self.gas.validate().map_err(|e| at("gas.gamma", e))?;
        self.transport.validate().map_err(|e| at("transport.mu_lo", e))?;
        if self.shell.alpha1 + self.shell.alpha2 <= 0.0 && !(self.gas.gamma > 12.0 / 7.0) {
            return Err(Error::Validation(format!(
                "shell.alpha1 + shell.alpha2 must be positive; an undamped shell is admissible only \
                 for the prototype pressure with gamma > 12/7 (gamma = {})",
                self.gas.gamma
            )));
        }
        if self.grid_n < 4 {
            return Err(Error::Config { line: v.line("grid.n"), message: "grid.n must be at least 4".into() });
        }
        if self.n_gamma <= 2 * self.shell.modes {
            return Err(Error::Validation(format!(
                "geometry.n_gamma = {} must exceed 2 * shell.modes = {}",
                self.n_gamma,
                2 * self.shell.modes
            )));
        }
        self.geometry()?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<ReferenceGeometry> {
        let chart = match self.chart {
            ChartKind::Circle => Chart::Circle { radius: self.radius },
            ChartKind::Ellipse => Chart::Ellipse { a: self.semi_axes.0, b: self.semi_axes.1 },
        };
        ReferenceGeometry::new(chart, self.tube.0, self.tube.1, self.half_width, self.n_gamma)
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid_n, self.half_width)
    }

    pub fn model(&self) -> FluidModel {
        FluidModel { gas: self.gas, transport: self.transport, approx: self.approx }
    }

    /// Sets Δt and δ consistently on the fluid and shell sides.
    pub fn set_dt(&mut self, dt: f64) {
        self.approx.dt = dt;
        self.shell.dt = dt;
    }

    pub fn set_delta(&mut self, delta: f64) {
        self.approx.delta = delta;
        self.shell.delta = delta;
    }

    /// Effective configuration: every key with its resolved value, plus derived parameters.
    pub fn effective(&self) -> String {
        let mut s = String::from("# effective configuration (defaults applied)\n");
        let chart = match self.chart {
            ChartKind::Circle => "circle",
            ChartKind::Ellipse => "ellipse",
        };
        let i = &self.initial;
        let vals: Vec<(&str, String)> = vec![
            ("geometry.chart", chart.into()),
            ("geometry.radius", fmt(self.radius)),
            ("geometry.semi_axis_x", fmt(self.semi_axes.0)),
            ("geometry.semi_axis_y", fmt(self.semi_axes.1)),
            ("geometry.a", fmt(self.tube.0)),
            ("geometry.b", fmt(self.tube.1)),
            ("geometry.half_width", fmt(self.half_width)),
            ("geometry.n_gamma", self.n_gamma.to_string()),
            ("grid.n", self.grid_n.to_string()),
            ("gas.c1", fmt(self.gas.c1)),
            ("gas.c2", fmt(self.gas.c2)),
            ("gas.cv", fmt(self.gas.cv)),
            ("gas.a", fmt(self.gas.a)),
            ("gas.gamma", fmt(self.gas.gamma)),
            ("transport.mu_lo", fmt(self.transport.mu_lo)),
            ("transport.mu_hi", fmt(self.transport.mu_hi)),
            ("transport.zeta_lo", fmt(self.transport.zeta_lo)),
            ("transport.zeta_hi", fmt(self.transport.zeta_hi)),
            ("transport.kappa_m_lo", fmt(self.transport.kappa_m_lo)),
            ("transport.kappa_m_hi", fmt(self.transport.kappa_m_hi)),
            ("transport.kappa_r_lo", fmt(self.transport.kappa_r_lo)),
            ("transport.kappa_r_hi", fmt(self.transport.kappa_r_hi)),
            ("approx.dt", fmt(self.approx.dt)),
            ("approx.delta", fmt(self.approx.delta)),
            ("approx.beta", fmt(self.approx.beta)),
            ("approx.k", fmt(self.approx.k)),
            ("shell.alpha1", fmt(self.shell.alpha1)),
            ("shell.alpha2", fmt(self.shell.alpha2)),
            ("shell.modes", self.shell.modes.to_string()),
            ("shell.substeps", self.shell.substeps.to_string()),
            ("shell.stiffness", fmt(self.shell.stiffness)),
            ("shell.thermal_coupling", self.shell.thermal_coupling.to_string()),
            ("fluid.cfl", fmt(self.fluid.cfl)),
            ("fluid.kernel_radius", fmt(self.fluid.kernel_radius)),
            ("fluid.theta_floor", fmt(self.fluid.theta_floor)),
            ("fluid.max_substeps", self.fluid.max_substeps.to_string()),
            ("fluid.pcg_tol", fmt(self.fluid.pcg_tol)),
            ("fluid.newton_iters", self.fluid.newton_iters.to_string()),
            ("coupling.trace_sampling", self.coupling.trace_sampling.to_string()),
            ("coupling.band_cells", fmt(self.coupling.band_cells)),
            ("coupling.margin_cells", fmt(self.coupling.margin_cells)),
            ("initial.rho_center", fmt(i.rho_center)),
            ("initial.rho_radius", fmt(i.rho_radius)),
            ("initial.rho_ambient", fmt(i.rho_ambient)),
            ("initial.theta", fmt(i.theta)),
            ("initial.theta_bump", fmt(i.theta_bump)),
            ("initial.theta_exterior", fmt(i.theta_exterior)),
            ("initial.swirl", fmt(i.swirl)),
            ("initial.w_amplitude", fmt(i.w_amplitude)),
            ("initial.w_mode", i.w_mode.to_string()),
            ("initial.v_amplitude", fmt(i.v_amplitude)),
            ("initial.shell_theta", fmt(i.shell_theta)),
            ("run.windows", self.windows.to_string()),
            ("run.seed", self.seed.to_string()),
            ("run.perturbation", fmt(self.perturbation)),
            ("output.snapshot_every", self.snapshot_every.to_string()),
            ("output.store_frames", self.coupling.store_frames.to_string()),
        ];
        for (k, v) in vals {
            let _ = writeln!(s, "{k} = {v}");
        }
        let a = &self.approx;
        let _ = writeln!(s, "# derived: approx.eta = {}", fmt(a.eta()));
        let _ = writeln!(s, "# derived: approx.omega = {}", fmt(a.omega()));
        let _ = writeln!(s, "# derived: approx.nu = {}", fmt(a.nu()));
        let _ = writeln!(s, "# derived: approx.lambda = {}", fmt(a.lambda()));
        let _ = writeln!(s, "# derived: run.t_end = {}", fmt(a.dt * self.windows as f64));
        s
    }

    /// Builds the splitting problem with the configured initial data (and the seeded
    /// perturbation when `run.perturbation > 0`).
    pub fn problem(&self) -> Result<SplittingProblem> {
        let geometry = self.geometry()?;
        let grid = self.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let eps = self.perturbation;
        let mut jitter = move |scale: f64| -> f64 {
            if eps > 0.0 {
                scale * (1.0 + eps * rng.gen_range(-1.0..1.0))
            } else {
                scale
            }
        };
        let init = &self.initial;
        let w_amp = jitter(init.w_amplitude);
        let v_amp = jitter(init.v_amplitude) + if eps > 0.0 { eps * 0.05 * jitter(1.0) } else { 0.0 };
        let theta_s = jitter(init.shell_theta);
        let rho_c = jitter(init.rho_center);
        let swirl = jitter(init.swirl);
        let bump = jitter(init.theta_bump);
        let phase = if eps > 0.0 { jitter(1.0) * TAU } else { 0.0 };
        let m = init.w_mode as f64;
        let n = self.n_gamma;
        let ys: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        let w0: Vec<f64> = ys.iter().map(|y| w_amp * (TAU * m * y + phase).cos()).collect();
        let v0: Vec<f64> = ys.iter().map(|y| v_amp * (TAU * m * y + phase).cos()).collect();
        let th0: Vec<f64> = ys.iter().map(|y| theta_s * (1.0 + 0.1 * eps * (TAU * y).cos())).collect();
        let shell = ShellState::from_nodes(&w0, &v0, &th0, self.shell.modes);
        let w = shell.displacement(n);
        let coeffs = build_coefficient_fields(&geometry, &w, &self.approx, &grid, self.coupling.band_cells)?;
        let nc = grid.len();
        let r0 = init.rho_radius;
        let mut rho = vec![0.0; nc];
        let mut mx = vec![0.0; nc];
        let mut my = vec![0.0; nc];
        let mut theta = vec![0.0; nc];
        for k in 0..nc {
            if !coeffs.interior[k] {
                continue;
            }
            let x = grid.center(k);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let s = if r < r0 { (1.0 - (r / r0).powi(2)).powi(2) } else { 0.0 };
            rho[k] = rho_c * s + init.rho_ambient;
            let u = [-swirl * s * x[1], swirl * s * x[0]];
            mx[k] = rho[k] * u[0];
            my[k] = rho[k] * u[1];
            theta[k] = init.theta + bump * s;
        }
        let ext = extend_initial_data(&grid, &coeffs.interior, &rho, &mx, &my, &theta, &self.approx, init.theta_exterior)?;
        let fluid = FluidState::new(grid, ext.rho, ext.mx, ext.my, ext.theta).with_chi(coeffs.chi_eta.clone());
        let problem = SplittingProblem {
            geometry,
            grid,
            model: self.model(),
            fluid: self.fluid,
            shell: self.shell,
            coupling: self.coupling,
            windows: self.windows,
            initial_fluid: fluid,
            initial_shell: shell,
        };
        problem.validate()?;
        Ok(problem)
    }
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// Tiny helper for tests and tools: default config text with overrides applied.
pub fn config_with(overrides: &[(&str, &str)]) -> Result<RunConfig> {
    let text: String = overrides.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    parse_config(&text)
}

/// Exposes the constant displacement sample used by degeneracy tests.
pub fn radial_displacement(n: usize, value: f64) -> DisplacementSample {
    DisplacementSample::constant(n, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.grid_n, 64);
        assert_eq!(c.shell.modes, 32);
        assert_eq!(c.coupling.trace_sampling, TraceSampling::Average);
    }

    #[test]
    fn unknown_key_reports_line() {
        match parse_config("# c\n\ngrid.n = 32\nfoo.bar = 1\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_value_reports_line() {
        match parse_config("approx.k = half\n") {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("approx.k"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
