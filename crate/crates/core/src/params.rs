//! Vehicle, motor, battery, drivetrain, driver and solver parameters.
//!
//! Every numeric field carries exactly one unit, stated on the field. The
//! JSON config schema uses these field names verbatim; any field left out of
//! a document takes the default documented here. Defaults marked *assumed*
//! are representative values for quantities the reference vehicle data does
//! not state.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Violation};
use crate::powertrain;
use crate::units::{self, POWER_CONSTANT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleBodyParams {
    /// kg
    pub mass: f64,
    /// m
    pub wheel_radius: f64,
    /// m²
    pub frontal_area: f64,
    pub drag_coefficient: f64,
    /// Constant rolling-resistance coefficient.
    pub f0: f64,
    /// Linear rolling-resistance coefficient, per (km/h / 100).
    pub f1: f64,
    /// Quartic rolling-resistance coefficient, per (km/h / 100)⁴.
    pub f4: f64,
    /// m/s²
    pub gravity: f64,
}

impl Default for VehicleBodyParams {
    fn default() -> Self {
        Self {
            mass: 1549.0,
            wheel_radius: 0.284,
            frontal_area: 1.87,
            drag_coefficient: 0.42,
            f0: 0.021,
            f1: 0.0,
            f4: 0.0,
            gravity: 9.81,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorParams {
    /// N·m
    pub rated_torque: f64,
    /// N·m
    pub max_torque: f64,
    /// kW
    pub rated_power: f64,
    /// kW
    pub max_power: f64,
    /// rpm
    pub rated_speed: f64,
    /// rpm
    pub max_speed: f64,
    /// Constant motor efficiency in (0, 1]. Assumed: 0.90.
    pub efficiency: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self {
            rated_torque: 95.5,
            max_torque: 230.0,
            rated_power: 30.0,
            max_power: 75.0,
            rated_speed: 3000.0,
            max_speed: 8000.0,
            efficiency: 0.90,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryParams {
    /// kWh
    pub capacity_energy: f64,
    /// V. Assumed: 350 V.
    pub nominal_voltage: f64,
    /// Ω. Assumed: 0.1 Ω.
    pub internal_resistance: f64,
    pub coulombic_efficiency: f64,
    /// Fraction in [0, 1].
    pub initial_soc: f64,
    /// Fraction in [0, 1].
    pub soc_floor: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            capacity_energy: 216.0,
            nominal_voltage: 350.0,
            internal_resistance: 0.1,
            coulombic_efficiency: 1.0,
            initial_soc: 0.9,
            soc_floor: 0.1,
        }
    }
}

impl BatteryParams {
    /// Amp-hour capacity `Cb = 1000 * E / Vn`.
    pub fn capacity_ah(&self) -> f64 {
        self.capacity_energy * 1000.0 / self.nominal_voltage
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrivetrainParams {
    /// Motor speed / wheel speed. Assumed: 4.8.
    pub gear_ratio: f64,
    pub transmission_efficiency: f64,
    /// N at the wheels, friction brakes only.
    pub max_friction_brake_force: f64,
    /// Battery energy recovered per unit of mechanical braking energy
    /// absorbed by the motor.
    pub regen_efficiency: f64,
    /// km/h. Regeneration is disabled at or below this speed.
    pub regen_cutoff_speed: f64,
}

impl Default for DrivetrainParams {
    fn default() -> Self {
        Self {
            gear_ratio: 4.8,
            transmission_efficiency: 0.9,
            max_friction_brake_force: 800.0,
            regen_efficiency: 0.5,
            regen_cutoff_speed: 2.0,
        }
    }
}

/// PI gains of the speed-tracking driver. Speed error is in km/h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverParams {
    /// Command per km/h of error.
    pub kp: f64,
    /// Command per km/h·s of integrated error.
    pub ki: f64,
    pub command_min: f64,
    pub command_max: f64,
}

impl Default for DriverParams {
    fn default() -> Self {
        Self {
            kp: 1.0,
            ki: 0.5,
            command_min: -1.0,
            command_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// s
    pub dt: f64,
    /// s. Upper bound for open-ended (repeated-cycle) runs.
    pub max_sim_time: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_sim_time: 1.0e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    pub body: VehicleBodyParams,
    pub motor: MotorParams,
    pub battery: BatteryParams,
    pub drivetrain: DrivetrainParams,
    pub driver: DriverParams,
    pub sim: SimParams,
}

/// Quantities derived from a validated config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Ah
    pub battery_capacity_ah: f64,
    /// rpm; crossover between the torque and power limits.
    pub base_speed_rpm: f64,
    /// rpm of motor per km/h of vehicle speed.
    pub motor_rpm_per_kmh: f64,
    /// N; maximum propulsion force at the wheels from standstill.
    pub standstill_wheel_force: f64,
}

/// Parse and validate a JSON config document.
pub fn parse_config(text: &str) -> Result<VehicleConfig, ConfigError> {
    let config: VehicleConfig = serde_json::from_str(text)?;
    config.validated()
}

impl VehicleConfig {
    /// Pretty JSON in the same schema `parse_config` reads.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validated(self) -> Result<Self, ConfigError> {
        let violations = validate(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError::Invalid(violations))
        }
    }

    pub fn derived(&self) -> DerivedParams {
        derived_quantities(self)
    }
}

/// Every violated invariant of `config`, in field order.
pub fn validate(config: &VehicleConfig) -> Vec<Violation> {
    let mut v = Checker::default();
    let VehicleConfig {
        body,
        motor,
        battery,
        drivetrain,
        driver,
        sim,
    } = config;

    v.positive("body.mass", "mass", body.mass);
    v.positive("body.wheel_radius", "wheel_radius", body.wheel_radius);
    v.positive("body.frontal_area", "frontal_area", body.frontal_area);
    v.positive(
        "body.drag_coefficient",
        "drag_coefficient",
        body.drag_coefficient,
    );
    v.non_negative("body.f0", "f0", body.f0);
    v.non_negative("body.f1", "f1", body.f1);
    v.non_negative("body.f4", "f4", body.f4);
    v.positive("body.gravity", "gravity", body.gravity);

    v.positive("motor.rated_torque", "rated_torque", motor.rated_torque);
    v.positive("motor.rated_power", "rated_power", motor.rated_power);
    v.positive("motor.rated_speed", "rated_speed", motor.rated_speed);
    v.check(
        "motor.max_torque",
        "rated_torque ≤ max_torque",
        motor.rated_torque <= motor.max_torque,
    );
    v.check(
        "motor.max_power",
        "rated_power ≤ max_power",
        motor.rated_power <= motor.max_power,
    );
    v.check(
        "motor.max_speed",
        "rated_speed ≤ max_speed",
        motor.rated_speed <= motor.max_speed,
    );
    v.unit_interval_open("motor.efficiency", "efficiency", motor.efficiency);
    if motor.rated_torque > 0.0 && motor.rated_power > 0.0 && motor.rated_speed > 0.0 {
        let implied = motor.rated_torque * motor.rated_speed / POWER_CONSTANT;
        v.check(
            "motor.rated_power",
            "rated_torque × rated_speed / 9550 = rated_power within 1%",
            (implied - motor.rated_power).abs() <= 0.01 * motor.rated_power,
        );
    }

    v.positive(
        "battery.capacity_energy",
        "capacity_energy",
        battery.capacity_energy,
    );
    v.positive(
        "battery.nominal_voltage",
        "nominal_voltage",
        battery.nominal_voltage,
    );
    v.non_negative(
        "battery.internal_resistance",
        "internal_resistance",
        battery.internal_resistance,
    );
    v.unit_interval_open(
        "battery.coulombic_efficiency",
        "coulombic_efficiency",
        battery.coulombic_efficiency,
    );
    v.check(
        "battery.soc_floor",
        "0 ≤ soc_floor",
        battery.soc_floor >= 0.0,
    );
    v.check(
        "battery.soc_floor",
        "soc_floor < initial_soc",
        battery.soc_floor < battery.initial_soc,
    );
    v.check(
        "battery.initial_soc",
        "initial_soc ≤ 1",
        battery.initial_soc <= 1.0,
    );

    v.positive("drivetrain.gear_ratio", "gear_ratio", drivetrain.gear_ratio);
    v.unit_interval_open(
        "drivetrain.transmission_efficiency",
        "transmission_efficiency",
        drivetrain.transmission_efficiency,
    );
    v.non_negative(
        "drivetrain.max_friction_brake_force",
        "max_friction_brake_force",
        drivetrain.max_friction_brake_force,
    );
    v.check(
        "drivetrain.regen_efficiency",
        "0 ≤ regen_efficiency ≤ 1",
        (0.0..=1.0).contains(&drivetrain.regen_efficiency),
    );
    v.non_negative(
        "drivetrain.regen_cutoff_speed",
        "regen_cutoff_speed",
        drivetrain.regen_cutoff_speed,
    );

    v.non_negative("driver.kp", "kp", driver.kp);
    v.non_negative("driver.ki", "ki", driver.ki);
    v.check(
        "driver.command_min",
        "command_min = -1",
        driver.command_min == -1.0,
    );
    v.check(
        "driver.command_max",
        "command_max = +1",
        driver.command_max == 1.0,
    );

    v.check("sim.dt", "0 < dt ≤ 1", sim.dt > 0.0 && sim.dt <= 1.0);
    v.positive("sim.max_sim_time", "max_sim_time", sim.max_sim_time);

    v.finish(config)
}

pub fn derived_quantities(config: &VehicleConfig) -> DerivedParams {
    let motor = &config.motor;
    let drivetrain = &config.drivetrain;
    DerivedParams {
        battery_capacity_ah: config.battery.capacity_ah(),
        base_speed_rpm: POWER_CONSTANT * motor.max_power / motor.max_torque,
        motor_rpm_per_kmh: powertrain::motor_speed_from_vehicle(
            1.0,
            config.body.wheel_radius,
            drivetrain.gear_ratio,
        ),
        standstill_wheel_force: motor.max_torque
            * drivetrain.gear_ratio
            * drivetrain.transmission_efficiency
            / config.body.wheel_radius,
    }
}

/// Vehicle speed (km/h) at which the motor reaches its maximum speed.
pub fn speed_at_max_motor_rpm(config: &VehicleConfig) -> f64 {
    let wheel_rad_s = units::rpm_to_rad_s(config.motor.max_speed) / config.drivetrain.gear_ratio;
    units::ms_to_kmh(wheel_rad_s * config.body.wheel_radius)
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, field: &str, constraint: &str, ok: bool) {
        if !ok {
            self.violations.push(Violation::new(field, constraint));
        }
    }

    fn positive(&mut self, field: &str, name: &str, x: f64) {
        self.check(field, &format!("{name} > 0"), x > 0.0);
    }

    fn non_negative(&mut self, field: &str, name: &str, x: f64) {
        self.check(field, &format!("{name} ≥ 0"), x >= 0.0);
    }

    fn unit_interval_open(&mut self, field: &str, name: &str, x: f64) {
        self.check(field, &format!("0 < {name} ≤ 1"), x > 0.0 && x <= 1.0);
    }

    fn finish(mut self, config: &VehicleConfig) -> Vec<Violation> {
        // NaN fails every comparison above; infinities need their own check.
        let json = serde_json::to_value(config).expect("config serializes");
        for (section, fields) in json.as_object().into_iter().flatten() {
            for (name, value) in fields.as_object().into_iter().flatten() {
                if value.is_null() {
                    self.violations
                        .push(Violation::new(format!("{section}.{name}"), "finite"));
                }
            }
        }
        self.violations
    }
}
