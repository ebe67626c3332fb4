//! Speed-tracking driver: a PI controller with a normalized output in
//! [-1, 1], and the split of that command into propulsion torque,
//! regenerative torque and friction braking.

use serde::Serialize;

use crate::params::{DriverParams, VehicleConfig};
use crate::powertrain;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DriverState {
    /// Integrated speed error, km/h·s.
    pub integral: f64,
    pub last_command: f64,
}

/// What the driver asks of the powertrain and the brakes for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ActuationRequest {
    /// N·m at the motor shaft.
    pub propulsion_torque: f64,
    /// N·m at the motor shaft, magnitude of the generating torque.
    pub regen_torque: f64,
    /// N at the wheels.
    pub friction_force: f64,
}

/// One PI update. The error is `target - actual` in km/h.
///
/// The integral is frozen while the output is saturated in the direction the
/// error pushes it (conditional integration), so stop-and-go driving cannot
/// wind it up.
pub fn pi_step(
    state: DriverState,
    target: f64,
    actual: f64,
    dt: f64,
    params: &DriverParams,
) -> (f64, DriverState) {
    let error = target - actual;
    let candidate = state.integral + error * dt;
    let raw = params.kp * error + params.ki * candidate;
    let command = raw.clamp(params.command_min, params.command_max);
    let winding_up =
        (raw > params.command_max && error > 0.0) || (raw < params.command_min && error < 0.0);
    let integral = if winding_up {
        state.integral
    } else {
        candidate
    };
    (
        command,
        DriverState {
            integral,
            last_command: command,
        },
    )
}

/// Allocate a command between motor and brakes.
///
/// Positive commands scale the torque available at `motor_speed`. Negative
/// commands demand a wheel braking force proportional to the total braking
/// capacity (friction plus regenerative); the motor takes as much of it as
/// its torque limit allows and the friction brakes cover the rest. Motor
/// braking is unavailable at or below the regen cutoff speed, beyond the
/// motor speed limit, or when `motor_braking` is false.
pub fn split_command(
    command: f64,
    motor_speed: f64,
    vehicle_speed: f64,
    config: &VehicleConfig,
    motor_braking: bool,
) -> ActuationRequest {
    let command = command.clamp(-1.0, 1.0);
    let limit = powertrain::torque_limit(&config.motor, motor_speed);
    if command > 0.0 {
        return ActuationRequest {
            propulsion_torque: command * limit,
            ..Default::default()
        };
    }
    if command == 0.0 {
        return ActuationRequest::default();
    }

    let dt = &config.drivetrain;
    let radius = config.body.wheel_radius;
    let regen_capacity = if motor_braking && vehicle_speed > dt.regen_cutoff_speed {
        -powertrain::wheel_torque(-limit, dt.gear_ratio, dt.transmission_efficiency) / radius
    } else {
        0.0
    };
    let demand = -command * (dt.max_friction_brake_force + regen_capacity);
    let regen_force = demand.min(regen_capacity);
    let friction_force = (demand - regen_force).min(dt.max_friction_brake_force);
    let regen_torque = if regen_force > 0.0 {
        powertrain::motor_torque_for_wheel_braking(
            regen_force * radius,
            dt.gear_ratio,
            dt.transmission_efficiency,
        )
        .min(limit)
    } else {
        0.0
    };
    ActuationRequest {
        propulsion_torque: 0.0,
        regen_torque,
        friction_force,
    }
}
