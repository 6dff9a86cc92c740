//! Runtime checks over trajectories: the energy ledger, limit monitors and weak-form
//! residuals.

pub mod ledger;
pub mod monitors;
pub mod weak;

pub use ledger::{EnergyLedger, LedgerCheck, LedgerRow, LEDGER_COLUMNS, SLACK_TOL};
pub use monitors::{
    check_exterior_density, exterior_mass, korn_quotient, penalization_defect, penalization_defect_from_ledger,
    pressure_strip_monitor, strip_field, strip_ramp, KornReport, StripReport, KORN_MASS_FLOOR,
};
pub use weak::{
    build_test_pair, energy_residual, entropy_inequality_residual, physical_energy, BlendLayers, FluidPoint, ShellPoint,
    SpaceTimeFields, TestField, TestPair, TrajectoryFields, WeakModel, WeakResidual,
};
