//! Motor envelope and power conversion, the fixed-ratio transmission, and the
//! amp-hour-counting battery.

mod battery;
mod motor;
mod transmission;

pub use battery::{battery_step, solve_terminal_current, BatteryState};
pub use motor::{
    available_torque, motor_current, motor_electrical_power, torque_limit, MotorOperatingPoint,
    MIN_TERMINAL_VOLTAGE,
};
pub use transmission::{motor_speed_from_vehicle, motor_torque_for_wheel_braking, wheel_torque};
