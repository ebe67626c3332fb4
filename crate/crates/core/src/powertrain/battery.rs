use serde::Serialize;

use super::motor::{motor_current, MIN_TERMINAL_VOLTAGE};
use crate::error::SimError;
use crate::params::BatteryParams;
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryState {
    pub soc: f64,
    /// V
    pub terminal_voltage: f64,
    /// kWh delivered at the terminals while discharging.
    pub cumulative_energy_out: f64,
    /// kWh accepted at the terminals while charging.
    pub cumulative_energy_regen: f64,
    /// Set once the state of charge has been clamped to [0, 1].
    pub saturated: bool,
}

impl BatteryState {
    pub fn initial(params: &BatteryParams) -> Self {
        Self {
            soc: params.initial_soc,
            terminal_voltage: params.nominal_voltage,
            cumulative_energy_out: 0.0,
            cumulative_energy_regen: 0.0,
            saturated: false,
        }
    }
}

/// Advance the pack by `dt` seconds at `current` A (positive discharging).
///
/// SoC is amp-hour counted, the terminal voltage drops across the internal
/// resistance, and terminal energy `V * J * dt` accumulates into the
/// discharge or regen total by sign.
pub fn battery_step(
    state: BatteryState,
    current: f64,
    dt: f64,
    params: &BatteryParams,
) -> BatteryState {
    let capacity_as = units::S_PER_H * params.capacity_ah();
    let raw = state.soc - params.coulombic_efficiency * current * dt / capacity_as;
    let soc = raw.clamp(0.0, 1.0);
    let terminal_voltage = params.nominal_voltage - params.internal_resistance * current;
    let energy = units::j_to_kwh(terminal_voltage * current * dt);
    let (out, regen) = if current >= 0.0 {
        (energy, 0.0)
    } else {
        (0.0, -energy)
    };
    BatteryState {
        soc,
        terminal_voltage,
        cumulative_energy_out: state.cumulative_energy_out + out,
        cumulative_energy_regen: state.cumulative_energy_regen + regen,
        saturated: state.saturated || soc != raw,
    }
}

/// Current and terminal voltage that deliver `power_kw` at the terminals.
///
/// `J = P / V` with `V = Vn - Z * J` is solved for the physical (small) root,
/// so power, voltage and current agree within the step.
pub fn solve_terminal_current(
    power_kw: f64,
    params: &BatteryParams,
) -> Result<(f64, f64), SimError> {
    let p = units::kw_to_w(power_kw);
    let vn = params.nominal_voltage;
    let disc = vn * vn - 4.0 * params.internal_resistance * p;
    if disc < 0.0 {
        return Err(SimError::PowerBeyondPack { power_kw });
    }
    // 2P / (Vn + sqrt(disc)) is the small root without cancellation.
    let j = 2.0 * p / (vn + disc.sqrt());
    let v = vn - params.internal_resistance * j;
    if v < MIN_TERMINAL_VOLTAGE {
        return Err(SimError::DegenerateVoltage(v));
    }
    Ok((motor_current(power_kw, v)?, v))
}
