//! Relay efficiency area (REA) model for energy-efficient relay placement in
//! a six-sector hexagonal cell.
//!
//! The crate evaluates the single-slope path-loss model, per-position energies
//! of direct transmission (DTx), full decode-forward (Full-DF) and
//! energy-optimized partial decode-forward (EO-PDF), the geometric REA
//! approximation with its characteristic distances, analytic cell averages,
//! and a Monte-Carlo user-drop oracle for validating all of it.

pub mod cell;
pub mod config;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod montecarlo;
pub mod numeric;
pub mod pathloss;
pub mod rea;
pub mod schemes;
pub mod sweep;

pub use cell::Cell;
pub use config::{CellConfig, Regime, RegimeChoice};
pub use error::{Error, Result};
pub use geometry::{sector_area, sector_contains, user_relay_distance, SectorSampler, UserPosition};
pub use metrics::{energy_report, p_rtx, EnergyReport, EstimatorOptions};
pub use montecarlo::{simulate, SimOptions, SimResult};
pub use pathloss::{gain_linear, link_gains, pathloss_db, CellLinks, LinkGains, PathLossScenario, ScenarioTable};
pub use rea::{characteristic_distances, rea_contains, CharacteristicDistances, ReaOutcome, Rejection};
pub use schemes::{
    best_scheme, dtx_energy, eopdf_energy, fulldf_energy, Allocation, Alpha, Direction, SchemeEnergy, SchemeId, Status,
};
pub use sweep::{emit, run_sweep, Format, SweepParameter, SweepRow, SweepSpec, COLUMNS};
