use serde::Serialize;

use crate::error::SimError;
use crate::params::MotorParams;
use crate::units::POWER_CONSTANT;

/// Terminal voltages below this are treated as a collapsed pack.
pub const MIN_TERMINAL_VOLTAGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MotorOperatingPoint {
    /// N·m, negative when generating.
    pub shaft_torque: f64,
    /// rpm
    pub speed: f64,
    /// kW at the battery terminals, negative when charging.
    pub electrical_power: f64,
    /// A, negative when charging.
    pub current: f64,
}

/// Peak torque available at `speed` rpm: the torque limit below base speed,
/// the power limit `9550 * P_max / n` above it.
pub fn available_torque(motor: &MotorParams, speed: f64) -> Result<f64, SimError> {
    if speed > motor.max_speed {
        return Err(SimError::Envelope {
            speed,
            max: motor.max_speed,
        });
    }
    if speed <= 0.0 {
        return Ok(motor.max_torque);
    }
    Ok(motor
        .max_torque
        .min(POWER_CONSTANT * motor.max_power / speed))
}

/// Like [`available_torque`] but zero beyond the speed limit instead of an
/// error; the engine never commands torque past max speed.
pub fn torque_limit(motor: &MotorParams, speed: f64) -> f64 {
    available_torque(motor, speed).unwrap_or(0.0)
}

/// Electrical power in kW for a signed shaft torque at `speed` rpm.
///
/// Losses always come out of the through-power: motoring draws
/// `P_mech / efficiency`, generating returns `P_mech * efficiency`.
pub fn motor_electrical_power(shaft_torque: f64, speed: f64, efficiency: f64) -> f64 {
    let mechanical = shaft_torque * speed / POWER_CONSTANT;
    if shaft_torque > 0.0 {
        mechanical / efficiency
    } else if shaft_torque < 0.0 {
        mechanical * efficiency
    } else {
        0.0
    }
}

/// Current in A drawn for `power_kw` at `terminal_voltage`, sign preserved.
pub fn motor_current(power_kw: f64, terminal_voltage: f64) -> Result<f64, SimError> {
    if terminal_voltage.is_nan() || terminal_voltage < MIN_TERMINAL_VOLTAGE {
        return Err(SimError::DegenerateVoltage(terminal_voltage));
    }
    Ok(1000.0 * power_kw / terminal_voltage)
}
