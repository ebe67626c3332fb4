use crate::units;

/// Wheel torque for a signed motor torque through a fixed reduction.
///
/// Losses always subtract from the through-power. Driving, the wheel sees
/// `tau * ratio * efficiency`. Generating, the wheel must supply
/// `tau * ratio / efficiency` for the motor to see `tau`.
pub fn wheel_torque(motor_torque: f64, gear_ratio: f64, efficiency: f64) -> f64 {
    if motor_torque > 0.0 {
        motor_torque * gear_ratio * efficiency
    } else if motor_torque < 0.0 {
        motor_torque * gear_ratio / efficiency
    } else {
        0.0
    }
}

/// Motor generating torque (magnitude) produced by a braking torque of
/// `wheel_torque` magnitude at the wheels.
pub fn motor_torque_for_wheel_braking(wheel_torque: f64, gear_ratio: f64, efficiency: f64) -> f64 {
    wheel_torque * efficiency / gear_ratio
}

/// Motor speed in rpm at vehicle speed `v` km/h.
pub fn motor_speed_from_vehicle(v: f64, wheel_radius: f64, gear_ratio: f64) -> f64 {
    units::rad_s_to_rpm(units::kmh_to_ms(v) / wheel_radius) * gear_ratio
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn torque_through_reduction() {
        assert_relative_eq!(wheel_torque(95.5, 4.8, 0.9), 412.56, max_relative = 1e-12);
        assert_relative_eq!(wheel_torque(95.5, 4.8, 1.0), 458.4, max_relative = 1e-12);
        assert_eq!(wheel_torque(0.0, 4.8, 0.9), 0.0);
        assert_relative_eq!(
            wheel_torque(-95.5, 4.8, 0.9),
            -95.5 * 4.8 / 0.9,
            max_relative = 1e-12
        );
        let back = motor_torque_for_wheel_braking(-wheel_torque(-95.5, 4.8, 0.9), 4.8, 0.9);
        assert_relative_eq!(back, 95.5, max_relative = 1e-12);
    }

    #[test]
    fn kinematics() {
        let n = motor_speed_from_vehicle(100.0, 0.284, 4.8);
        let exact = 100.0 / 3.6 / 0.284 * 60.0 / (2.0 * std::f64::consts::PI) * 4.8;
        assert_relative_eq!(n, exact, max_relative = 1e-12);
        assert_eq!(n.round(), 4483.0);
        assert_eq!(motor_speed_from_vehicle(0.0, 0.284, 4.8), 0.0);
        assert_relative_eq!(
            motor_speed_from_vehicle(180.0, 0.284, 4.8),
            1.8 * exact,
            max_relative = 1e-12
        );
        assert!(motor_speed_from_vehicle(180.0, 0.284, 4.8) > 8000.0);
    }
}
