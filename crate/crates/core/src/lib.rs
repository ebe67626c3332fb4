//! Longitudinal simulation of a battery electric vehicle on a drive cycle.
//!
//! A fixed-step forward model: a PI driver tracks the cycle's speed trace,
//! its command is split between the traction motor and the friction brakes,
//! and the resulting forces drive the vehicle body while the battery is
//! charged or discharged through an internal-resistance model.

pub mod cycle;
pub mod driver;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod params;
pub mod powertrain;
pub mod units;

pub use cycle::{DriveCycle, Sample};
pub use engine::{
    ledger_check, run, run_with_sink, step, DriverMode, EnergyLedger, RunOptions, SimState,
    SimSummary, StopReason, TraceRecord, TraceSink,
};
pub use error::{ConfigError, CycleError, ExperimentError, SimError, Violation};
pub use params::{parse_config, validate, VehicleConfig};
