//! Simulation engine for probe transmission through a whispering-gallery
//! optomechanical microresonator whose clockwise and counterclockwise modes
//! are coupled by two nanoscatterers.
//!
//! The relative scatterer angle steers the system through exceptional points
//! of the non-Hermitian mode coupling; this crate locates those points,
//! solves the driven nonlinear steady state, and computes the linearized
//! probe response (transmission and group delay) across parameter sweeps.
//!
//! Pipeline, bottom to top:
//!
//! * [`params`] — parameter records, the flat TOML config, drive amplitudes.
//! * [`coupling`] — scattering rates J1/J2, complex eigenfrequencies,
//!   frequency splitting, exceptional-point location versus angle.
//! * [`steady`] — mean fields and mechanical displacement from the real
//!   quintic in the shifted detuning; relative photon number eta.
//! * [`response`] — the 5x5 sideband system, probe transmission, group
//!   delay, and the closed-form cross-check with its reconciliation report.
//! * [`sweep`] — 1-D/2-D parameter sweeps and figure-reproduction recipes.
//! * [`validate`] — every oracle cross-check as a pass/fail report.
//! * [`oracles`] — the independent reference implementations backing those
//!   checks.
//!
//! All angular frequencies are rad/s, displacements m, powers W; see
//! [`params`] for the unit convention of the config file.

pub mod coupling;
pub mod oracles;
pub mod output;
pub mod params;
pub mod response;
pub mod steady;
pub mod sweep;
pub mod validate;

pub use coupling::{CouplingState, EpBranch, EpRecord, coupling_at, critical_angles, splitting_curve};
pub use params::{
    Amplitudes, C64, Config, ConfigError, DriveParams, GridSpec, PhysicalParams, SweepDefaults,
    amplitudes_from_power, load_config,
};
pub use response::{
    ClosedFormDeltaA, GroupDelayEstimate, ReconciliationReport, ResponseError, ResponsePoint,
    SidebandSolution, Susceptibilities, group_delay, reconcile, solve_sidebands_closed_form,
    solve_sidebands_direct, susceptibilities, transmission_amplitude, transmission_spectrum,
};
pub use steady::{EtaPoint, SteadyState, eta_curve, solve_steady};
pub use sweep::{
    AxisSpec, FigureData, FigureDataset, FigureId, SweepAxis, SweepError, SweepRow, SweepSpec,
    ep_scan, recipe, reproduce_figure, run_sweep,
};
pub use validate::{CheckResult, ValidationReport, validate};
