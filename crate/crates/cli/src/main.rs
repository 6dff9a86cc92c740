//! `fsi-heat-sim`: batch driver for the coupled fluid–shell simulator.
//!
//! Exit codes: 0 clean finish, 2 the moving domain degenerated (partial outputs are
//! written), 1 any other error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsi_heat_core::config::{parse_config, RunConfig};
use fsi_heat_core::constitutive::{log_grid, validate_hypotheses};
use fsi_heat_core::coupling::{continuation_study, Sweep};
use fsi_heat_core::diagnostics::SLACK_TOL;
use fsi_heat_core::io::{read_ledger, read_text, study_csv, write_outputs, write_text, OutputOptions};
use fsi_heat_core::manufactured::{default_resolutions, residual_convergence, ManufacturedCase};
use fsi_heat_core::{run_splitting, Error, StopReason};

#[derive(Parser)]
#[command(name = "fsi-heat-sim", version, about = "Penalised splitting simulator for a heat-conducting gas inside a thermoelastic shell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one coupled simulation and write ledger, traces, snapshots and plot series.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continuation study over k, delta or dt, e.g. `--sweep k=0.5,0.35,0.25`.
    Study {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sweep: String,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Manufactured-solution convergence table (CSV).
    Mms {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-validate a saved ledger.
    Check {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long, default_value_t = SLACK_TOL)]
        tol: f64,
    },
    /// Sample the constitutive hypotheses on a log grid of states.
    ValidateModel {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

enum Outcome {
    Clean,
    Degenerate,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let outcome = match dispatch(cli.command) {
        Ok(o) => o,
        Err(Error::Degeneracy(msg)) => {
            eprintln!("degenerate: {msg}");
            Outcome::Degenerate
        }
        Err(e) => {
            eprintln!("error: {e}");
            Outcome::Failed
        }
    };
    match outcome {
        Outcome::Clean => ExitCode::SUCCESS,
        Outcome::Degenerate => ExitCode::from(2),
        Outcome::Failed => ExitCode::from(1),
    }
}

/// `FSI_HEAT_THREADS` caps the worker pool.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("FSI_HEAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("FSI_HEAT_THREADS must be a positive integer (got '{raw}')"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load_config(path: Option<&PathBuf>) -> fsi_heat_core::Result<(String, RunConfig)> {
    let text = match path {
        Some(p) => read_text(p)?,
        None => String::new(),
    };
    let cfg = parse_config(&text)?;
    Ok((text, cfg))
}

fn emit(out: Option<&PathBuf>, text: &str) -> fsi_heat_core::Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_sweep(spec: &str) -> fsi_heat_core::Result<Sweep> {
    let bad = || Error::Validation(format!("sweep must look like k=0.5,0.35 or delta=… or dt=… (got '{spec}')"));
    let (name, list) = spec.split_once('=').ok_or_else(bad)?;
    let values = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let s = s.trim();
            match s.split_once('/') {
                Some((a, b)) => Ok(a.trim().parse::<f64>().map_err(|_| bad())? / b.trim().parse::<f64>().map_err(|_| bad())?),
                None => s.parse::<f64>().map_err(|_| bad()),
            }
        })
        .collect::<fsi_heat_core::Result<Vec<f64>>>()?;
    match name.trim() {
        "k" => Ok(Sweep::K(values)),
        "delta" => Ok(Sweep::Delta(values)),
        "dt" => Ok(Sweep::Dt(values)),
        _ => Err(bad()),
    }
}

fn dispatch(command: Command) -> fsi_heat_core::Result<Outcome> {
    match command {
        Command::Run { config, out } => {
            let (text, cfg) = load_config(config.as_ref())?;
            let problem = cfg.problem()?;
            let outcome = run_splitting(&problem)?;
            let effective = cfg.effective();
            let opts = OutputOptions {
                snapshot_every: cfg.snapshot_every,
                config_text: Some(&text),
                config_effective: Some(&effective),
            };
            write_outputs(&outcome, &out, &opts)?;
            match &outcome.stop {
                StopReason::Completed => {
                    eprintln!("completed {} windows; outputs in {}", outcome.ledger.len(), out.display());
                    Ok(Outcome::Clean)
                }
                StopReason::Degenerate { window, margin, message } => {
                    eprintln!("degenerate at window {window} (margin {margin:.3e}): {message}");
                    Ok(Outcome::Degenerate)
                }
            }
        }
        Command::Study { config, sweep, out } => {
            let (_, cfg) = load_config(config.as_ref())?;
            let sweep = parse_sweep(&sweep)?;
            let problem = cfg.problem()?;
            let report = continuation_study(&problem, &sweep, None)?;
            emit(out.as_ref(), &study_csv(&report))?;
            Ok(Outcome::Clean)
        }
        Command::Mms { case, levels, out } => {
            let case: ManufacturedCase = case.parse()?;
            let table = residual_convergence(case, &default_resolutions(levels))?;
            emit(out.as_ref(), &table.to_csv())?;
            Ok(Outcome::Clean)
        }
        Command::Check { ledger, tol } => {
            let ledger = read_ledger(&ledger)?;
            let check = ledger.check(tol);
            println!("rows {}", check.rows);
            println!("worst_relative_slack {:e}", check.worst_relative_slack);
            println!("worst_column_mismatch {:e}", check.worst_column_mismatch);
            for f in &check.failures {
                println!("FAIL {f}");
            }
            println!("{}", if check.passed() { "PASS" } else { "FAIL" });
            Ok(if check.passed() { Outcome::Clean } else { Outcome::Failed })
        }
        Command::ValidateModel { config, points } => {
            let (_, cfg) = load_config(config.as_ref())?;
            let grid = log_grid(1e-3, 1e3, points.max(1));
            let report = validate_hypotheses(&cfg.gas, &cfg.transport, &grid, &grid);
            println!("{report}");
            Ok(if report.all_pass() { Outcome::Clean } else { Outcome::Failed })
        }
    }
}
