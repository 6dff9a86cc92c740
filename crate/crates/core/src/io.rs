//! Plain-text run outputs: ledger, shell modes, Γ traces, field snapshots and plot
//! series. Floats are written with Rust's shortest round-trip formatting, so every file
//! is byte-deterministic and snapshots re-read bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::coupling::{Frame, RunOutcome, StopReason, StudyReport};
use crate::diagnostics::EnergyLedger;
use crate::error::{Error, Result};
use crate::fluid::FluidState;
use crate::grid::Grid;

pub const SHELL_MODES_HEADER: &str = "window,time,mode,w_re,w_im,v_re,v_im,theta_re,theta_im";
pub const GAMMA_TRACE_HEADER: &str = "window,time,node,y,w,w_t,theta,v_n,tau";
pub const ENERGY_PLOT_HEADER: &str = "time,fluid_energy,shell_energy,lhs_total,e0,relative_slack";
pub const EXTERIOR_PLOT_HEADER: &str = "time,exterior_mass,radiation_exterior_cum,viscous_diss_exterior_cum";
pub const PENALTY_PLOT_HEADER: &str = "time,pen_fluid_v_cum,pen_fluid_t_cum,pen_shell_v_cum,pen_shell_t_cum";
pub const INTERFACE_PLOT_HEADER: &str = "time,w_min,w_max,theta_min,theta_max,mismatch_v,mismatch_tau";

/// What to write besides the ledger-derived files.
#[derive(Debug, Clone, Default)]
pub struct OutputOptions<'a> {
    /// Snapshot every `snapshot_every` windows (0 disables snapshots).
    pub snapshot_every: usize,
    /// Config text copied verbatim to `config.txt`.
    pub config_text: Option<&'a str>,
    /// Effective config echo written to `config_effective.txt`.
    pub config_effective: Option<&'a str>,
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, Default)]
pub struct OutputFiles {
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes every output of a run into `dir` (created if missing).
pub fn write_outputs(outcome: &RunOutcome, dir: &Path, opts: &OutputOptions<'_>) -> Result<OutputFiles> {
    create_dir(dir)?;
    let plots = dir.join("plots");
    create_dir(&plots)?;
    let mut out = OutputFiles::default();
    let mut emit = |path: PathBuf, text: String| -> Result<()> {
        write_file(&path, &text)?;
        out.files.push(path);
        Ok(())
    };
    if let Some(text) = opts.config_text {
        emit(dir.join("config.txt"), text.to_string())?;
    }
    if let Some(text) = opts.config_effective {
        emit(dir.join("config_effective.txt"), text.to_string())?;
    }
    emit(dir.join("ledger.csv"), outcome.ledger.to_csv())?;
    let frames = &outcome.trajectory.frames;
    // Frame 0 is the initial state; zero-window runs keep headers only.
    let windows: Vec<&Frame> = if outcome.ledger.is_empty() { Vec::new() } else { frames.iter().collect() };
    emit(dir.join("shell_modes.csv"), shell_modes_csv(&windows))?;
    emit(dir.join("gamma_trace.csv"), gamma_trace_csv(&windows))?;
    if opts.snapshot_every > 0 {
        for f in &windows {
            if f.window % opts.snapshot_every == 0 {
                let path = dir.join(format!("field_{:04}.dat", f.window));
                emit(path, Snapshot::from_state(f.window, f.time, &f.fluid).to_text())?;
            }
        }
    }
    emit(plots.join("energy.csv"), energy_plot_csv(&outcome.ledger))?;
    emit(plots.join("exterior.csv"), exterior_plot_csv(&outcome.ledger))?;
    emit(plots.join("penalties.csv"), penalty_plot_csv(&outcome.ledger))?;
    emit(plots.join("interface.csv"), interface_plot_csv(&windows))?;
    emit(dir.join("stop.txt"), stop_text(&outcome.stop))?;
    Ok(out)
}

pub fn stop_text(stop: &StopReason) -> String {
    match stop {
        StopReason::Completed => "completed\n".to_string(),
        StopReason::Degenerate { window, margin, message } => {
            format!("degenerate\nwindow {window}\nmargin {margin:?}\nmessage {message}\n")
        }
    }
}

pub fn shell_modes_csv(frames: &[&Frame]) -> String {
    let mut s = format!("{SHELL_MODES_HEADER}\n");
    for f in frames {
        let sh = &f.shell;
        for m in 0..sh.w.len() {
            let _ = writeln!(
                s,
                "{},{:?},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                f.window, f.time, m, sh.w[m].re, sh.w[m].im, sh.v[m].re, sh.v[m].im, sh.theta[m].re, sh.theta[m].im
            );
        }
    }
    s
}

pub fn gamma_trace_csv(frames: &[&Frame]) -> String {
    let mut s = format!("{GAMMA_TRACE_HEADER}\n");
    for f in frames {
        let n = f.displacement.len();
        for j in 0..n {
            let nn = f.normals[j];
            let vn = f.kernel_v[j][0] * nn[0] + f.kernel_v[j][1] * nn[1];
            let _ = writeln!(
                s,
                "{},{:?},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                f.window,
                f.time,
                j,
                f.displacement.node_position(j),
                f.displacement.node(j),
                f.shell_v[j],
                f.shell_theta[j],
                vn,
                f.kernel_tau[j]
            );
        }
    }
    s
}

pub fn energy_plot_csv(ledger: &EnergyLedger) -> String {
    let mut s = format!("{ENERGY_PLOT_HEADER}\n");
    for r in &ledger.rows {
        let rel = if r.e0 > 0.0 { r.slack / r.e0 } else { 0.0 };
        let _ = writeln!(s, "{:?},{:?},{:?},{:?},{:?},{:?}", r.time, r.fluid_total(), r.shell_total(), r.lhs_total, r.e0, rel);
    }
    s
}

pub fn exterior_plot_csv(ledger: &EnergyLedger) -> String {
    let mut s = format!("{EXTERIOR_PLOT_HEADER}\n");
    for r in &ledger.rows {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?}", r.time, r.exterior_mass, r.radiation_exterior_cum, r.viscous_diss_exterior_cum);
    }
    s
}

pub fn penalty_plot_csv(ledger: &EnergyLedger) -> String {
    let mut s = format!("{PENALTY_PLOT_HEADER}\n");
    for r in &ledger.rows {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?}",
            r.time, r.pen_fluid_v_cum, r.pen_fluid_t_cum, r.pen_shell_v_cum, r.pen_shell_t_cum
        );
    }
    s
}

pub fn interface_plot_csv(frames: &[&Frame]) -> String {
    let mut s = format!("{INTERFACE_PLOT_HEADER}\n");
    for f in frames {
        let w = f.displacement.values();
        let (wmin, wmax) = min_max(w);
        let (tmin, tmax) = min_max(&f.shell_theta);
        let mut mv = 0.0f64;
        let mut mt = 0.0f64;
        for j in 0..f.normals.len() {
            let a = [f.shell_v[j] * f.normals[j][0], f.shell_v[j] * f.normals[j][1]];
            mv = mv.max((f.kernel_v[j][0] - a[0]).hypot(f.kernel_v[j][1] - a[1]));
            mt = mt.max((f.kernel_tau[j] - f.shell_theta[j]).abs());
        }
        let _ = writeln!(s, "{:?},{:?},{:?},{:?},{:?},{:?},{:?}", f.time, wmin, wmax, tmin, tmax, mv, mt);
    }
    s
}

fn min_max(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Study table: one row per parameter value, then the fitted slopes and successive
/// differences as comment lines.
pub fn study_csv(report: &StudyReport) -> String {
    let mut s = format!(
        "{},windows,degenerate,max_exterior_mass,final_exterior_mass,total_mass,radiation_exterior,viscous_exterior,penalization_defect,artificial_energy,min_relative_slack\n",
        report.parameter
    );
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{:?},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.value,
            r.windows,
            r.degenerate as u8,
            r.max_exterior_mass,
            r.final_exterior_mass,
            r.total_mass,
            r.radiation_exterior,
            r.viscous_exterior,
            r.penalization_defect,
            r.artificial_energy,
            r.min_relative_slack
        );
    }
    if !report.rows.is_empty() {
        let _ = writeln!(
            s,
            "# slopes: exterior_mass {:?}, radiation_exterior {:?}, viscous_exterior {:?}, penalization_defect {:?}",
            report.slope_exterior_mass, report.slope_radiation_exterior, report.slope_viscous_exterior, report.slope_defect
        );
        let diffs: Vec<String> = report.successive_differences.iter().map(|d| format!("{d:?}")).collect();
        let _ = writeln!(s, "# successive_differences: {}", diffs.join(" "));
    }
    s
}

/// A fluid snapshot: grid metadata plus row-major ρ, m₁, m₂, ϑ.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub window: usize,
    pub time: f64,
    pub n: usize,
    pub half_width: f64,
    pub rho: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
    pub theta: Vec<f64>,
}

const SNAPSHOT_MAGIC: &str = "# fsi-heat-sim field snapshot";

impl Snapshot {
    pub fn from_state(window: usize, time: f64, state: &FluidState) -> Self {
        Snapshot {
            window,
            time,
            n: state.grid.n,
            half_width: state.grid.half_width,
            rho: state.rho.clone(),
            mx: state.mx.clone(),
            my: state.my.clone(),
            theta: state.theta.clone(),
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.half_width)
    }

    /// Rebuilds a fluid state (velocities re-derived from the momenta).
    pub fn to_state(&self) -> FluidState {
        FluidState::new(self.grid(), self.rho.clone(), self.mx.clone(), self.my.clone(), self.theta.clone())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(80 * self.rho.len());
        let _ = writeln!(s, "{SNAPSHOT_MAGIC}");
        let _ = writeln!(s, "window {}", self.window);
        let _ = writeln!(s, "time {:?}", self.time);
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "half_width {:?}", self.half_width);
        for (name, field) in [("rho", &self.rho), ("m1", &self.mx), ("m2", &self.my), ("theta", &self.theta)] {
            let _ = writeln!(s, "field {name}");
            for row in field.chunks(self.n.max(1)) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::format(path, format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, l)) if l == SNAPSHOT_MAGIC => {}
            _ => return Err(bad(1, "missing snapshot header")),
        }
        let mut header = |key: &str| -> Result<String> {
            let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            let rest = l.strip_prefix(key).ok_or_else(|| bad(i, &format!("expected '{key}'")))?;
            Ok(rest.trim().to_string())
        };
        let num = |s: String, what: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| bad(0, &format!("malformed {what}"))) };
        let window = header("window")?.parse::<usize>().map_err(|_| bad(2, "malformed window"))?;
        let time = num(header("time")?, "time")?;
        let n = header("n")?.parse::<usize>().map_err(|_| bad(4, "malformed n"))?;
        let half_width = num(header("half_width")?, "half_width")?;
        if n < 4 || !(half_width > 0.0) {
            return Err(bad(4, "grid metadata out of range (n >= 4, half_width > 0)"));
        }
        let mut fields: Vec<Vec<f64>> = Vec::with_capacity(4);
        for name in ["rho", "m1", "m2", "theta"] {
            let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated snapshot"))?;
            if l != format!("field {name}") {
                return Err(bad(i, &format!("expected 'field {name}'")));
            }
            let mut vals = Vec::with_capacity(n * n);
            for _ in 0..n {
                let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated field"))?;
                for tok in l.split_whitespace() {
                    vals.push(tok.parse::<f64>().map_err(|_| bad(i, &format!("malformed value '{tok}'")))?);
                }
            }
            if vals.len() != n * n {
                return Err(bad(0, &format!("field {name} holds {} values, expected {}", vals.len(), n * n)));
            }
            fields.push(vals);
        }
        let theta = fields.pop().unwrap_or_default();
        let my = fields.pop().unwrap_or_default();
        let mx = fields.pop().unwrap_or_default();
        let rho = fields.pop().unwrap_or_default();
        Ok(Snapshot { window, time, n, half_width, rho, mx, my, theta })
    }
}

pub fn write_snapshot(path: &Path, snapshot: &Snapshot) -> Result<()> {
    write_file(path, &snapshot.to_text())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Snapshot::parse(&text, path)
}

pub fn read_ledger(path: &Path) -> Result<EnergyLedger> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EnergyLedger::from_csv(&text).map_err(|e| match e {
        Error::Config { line, message } => Error::format(path, format!("line {line}: {message}")),
        other => other,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            create_dir(parent)?;
        }
    }
    write_file(path, text)
}
