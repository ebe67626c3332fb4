//! Shared fixtures for the engine benchmarks.

use evsim_core::{DriveCycle, VehicleConfig};

pub fn fixtures() -> (VehicleConfig, DriveCycle) {
    (VehicleConfig::default(), DriveCycle::udds())
}
