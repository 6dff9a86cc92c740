//! Penalised operator-splitting simulator for a heat-conducting compressible gas in a
//! domain bounded by a thermoelastic shell.
//!
//! The fluid lives on a fixed box `B` with degraded coefficients outside the moving
//! domain; each time window advances the shell (Fourier–Galerkin) against lagged fluid
//! traces and then the fluid (finite volumes) against the fresh shell data, with δ/Δt
//! penalties tying the interface values together.

pub mod config;
pub mod constitutive;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod extension;
pub mod fluid;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod manufactured;
pub mod numerics;
pub mod structure;

pub use constitutive::{GasModel, TransportModel};
pub use coupling::{run_splitting, CouplingParams, RunOutcome, SplittingProblem, StopReason, TraceSampling, Trajectory};
pub use diagnostics::{EnergyLedger, LedgerRow};
pub use error::{Error, Result};
pub use extension::ApproxParams;
pub use fluid::{FluidModel, FluidParams, FluidState};
pub use geometry::{Chart, DisplacementSample, ReferenceGeometry};
pub use grid::Grid;
pub use structure::{ShellParams, ShellState};
