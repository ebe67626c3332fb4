//! The fixed-step closed loop: driver, powertrain, body and battery wired
//! together, plus run lifecycle, summary and energy ledger.
//!
//! Each step runs the blocks in a fixed order. The driver sees the speed at
//! the start of the step and the target at its end; the battery sees the
//! motor power of the step just integrated.

mod ledger;
mod trace;

use serde::Serialize;

pub use ledger::{ledger_check, EnergyLedger, LedgerCheck, LEDGER_ABS_TOLERANCE, LEDGER_TOLERANCE};
pub use trace::{Decimate, Discard, SimTrace, TraceRecord, TraceSink};

use crate::cycle::DriveCycle;
use crate::driver::{pi_step, split_command, DriverState};
use crate::dynamics::{self, BodyState, ForceBreakdown};
use crate::error::SimError;
use crate::params::VehicleConfig;
use crate::powertrain::{
    self, battery_step, motor_electrical_power, solve_terminal_current, BatteryState,
    MotorOperatingPoint,
};
use crate::units::{self, POWER_CONSTANT};

/// Who produces the command each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DriverMode {
    /// PI tracking of the cycle target.
    Pi,
    /// A fixed command, e.g. 1.0 for full throttle.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    /// Store recovered braking energy in the battery. When off the motor
    /// still brakes but the energy is dissipated.
    pub regen_enabled: bool,
    /// Allow the motor to supply braking torque at all.
    pub motor_braking: bool,
    /// Loop the cycle instead of stopping at its end.
    pub repeat: bool,
    pub stop_at_soc: Option<f64>,
    /// s; defaults to the config's `max_sim_time`.
    pub max_time: Option<f64>,
    pub driver: DriverMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            regen_enabled: true,
            motor_braking: true,
            repeat: false,
            stop_at_soc: None,
            max_time: None,
            driver: DriverMode::Pi,
        }
    }
}

impl RunOptions {
    /// Target speed at `t`, wrapping the cycle when repeating.
    pub fn target_at(&self, cycle: &DriveCycle, t: f64) -> f64 {
        let d = cycle.duration();
        if self.repeat && t > d {
            // Map into (0, d] so the seam reads the end of the previous lap.
            let laps = (t / d).ceil() - 1.0;
            cycle.target_speed(t - laps * d)
        } else {
            cycle.target_speed(t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CycleEnd,
    SocFloor,
    MaxTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimState {
    pub steps: u64,
    /// s
    pub t: f64,
    pub body: BodyState,
    pub battery: BatteryState,
    pub driver: DriverState,
    pub last_forces: ForceBreakdown,
    pub last_motor: MotorOperatingPoint,
    pub ledger: EnergyLedger,
}

impl SimState {
    pub fn initial(config: &VehicleConfig) -> Self {
        Self {
            steps: 0,
            t: 0.0,
            body: BodyState::default(),
            battery: BatteryState::initial(&config.battery),
            driver: DriverState::default(),
            last_forces: ForceBreakdown::default(),
            last_motor: MotorOperatingPoint::default(),
            ledger: EnergyLedger::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    /// s
    pub duration: f64,
    /// km
    pub distance: f64,
    pub soc_start: f64,
    pub soc_end: f64,
    /// km/h
    pub max_tracking_error_kmh: f64,
    /// Percent of the cycle's peak speed.
    pub max_tracking_error_pct: f64,
    /// kWh at the terminals.
    pub energy_out: f64,
    /// kWh at the terminals.
    pub energy_regen: f64,
    pub cycles_completed: u64,
    pub stop_reason: StopReason,
}

/// Advance `state` by one `dt`.
pub fn step(
    state: &SimState,
    cycle: &DriveCycle,
    config: &VehicleConfig,
    options: &RunOptions,
) -> Result<(SimState, TraceRecord), SimError> {
    let dt = config.sim.dt;
    let body_params = &config.body;
    let drivetrain = &config.drivetrain;
    let (ratio, eta_t, radius) = (
        drivetrain.gear_ratio,
        drivetrain.transmission_efficiency,
        body_params.wheel_radius,
    );
    let steps = state.steps + 1;
    let t = steps as f64 * dt;
    let v0 = state.body.speed;

    // (1) target, (2) driver
    let target = options.target_at(cycle, t);
    let (command, driver) = match options.driver {
        DriverMode::Pi => pi_step(state.driver, target, v0, dt, &config.driver),
        DriverMode::Fixed(c) => {
            let c = c.clamp(-1.0, 1.0);
            (
                c,
                DriverState {
                    last_command: c,
                    ..state.driver
                },
            )
        }
    };

    // (3) allocation, (4) wheel forces
    let motor_speed_start = powertrain::motor_speed_from_vehicle(v0, radius, ratio);
    let request = split_command(
        command,
        motor_speed_start,
        v0,
        config,
        options.motor_braking,
    );
    let propulsion = powertrain::wheel_torque(request.propulsion_torque, ratio, eta_t) / radius;
    let regen_force = -powertrain::wheel_torque(-request.regen_torque, ratio, eta_t) / radius;

    // (5) road load, (6) integration
    let forces = ForceBreakdown::resolve(
        body_params,
        v0,
        propulsion,
        regen_force,
        request.friction_force,
    );
    let accel = dynamics::body_acceleration(&forces, body_params, v0);
    let body = dynamics::integrate(state.body, accel, dt);
    let displacement = dynamics::work_displacement(v0, body.speed, accel, dt);
    let mean_speed = units::ms_to_kmh(displacement / dt);
    let motor_speed = powertrain::motor_speed_from_vehicle(mean_speed, radius, ratio);

    // (7) electrical side
    let (shaft_torque, mechanical_kw, power_kw) = if request.propulsion_torque > 0.0 {
        let tau = request.propulsion_torque;
        (
            tau,
            tau * motor_speed / POWER_CONSTANT,
            motor_electrical_power(tau, motor_speed, config.motor.efficiency),
        )
    } else if request.regen_torque > 0.0 {
        let tau = request.regen_torque;
        let mechanical = tau * motor_speed / POWER_CONSTANT;
        let recovered = if options.regen_enabled {
            drivetrain.regen_efficiency * mechanical / eta_t
        } else {
            0.0
        };
        (-tau, -mechanical, -recovered)
    } else {
        (0.0, 0.0, 0.0)
    };
    let (current, _) = solve_terminal_current(power_kw, &config.battery)?;
    let battery = battery_step(state.battery, current, dt, &config.battery);

    // (8) ledger
    let mut ledger = state.ledger;
    let battery_params = &config.battery;
    let chemical = units::j_to_kwh(battery_params.nominal_voltage * current * dt);
    if current > 0.0 {
        ledger.battery_out += chemical;
    } else {
        ledger.battery_regen_in -= chemical;
    }
    ledger.resistive_internal_loss +=
        units::j_to_kwh(battery_params.internal_resistance * current * current * dt);
    let (u0, u1) = (units::kmh_to_ms(v0), units::kmh_to_ms(body.speed));
    ledger.kinetic_delta += units::j_to_kwh(0.5 * body_params.mass * (u1 * u1 - u0 * u0));
    ledger.rolling_loss += units::j_to_kwh(forces.rolling * displacement);
    ledger.aero_loss += units::j_to_kwh(forces.aero * displacement);
    ledger.friction_brake_loss += units::j_to_kwh(forces.friction_brake * displacement);
    let drivetrain_kw = if mechanical_kw >= 0.0 {
        // motoring: electrical in, wheel work out
        power_kw - eta_t * mechanical_kw
    } else {
        // generating: wheel braking power in, recovered electrical out
        -mechanical_kw / eta_t + power_kw
    };
    ledger.drivetrain_loss += units::j_to_kwh(units::kw_to_w(drivetrain_kw) * dt);
    ledger.refresh();

    // (9) emit
    let last_motor = MotorOperatingPoint {
        shaft_torque,
        speed: motor_speed,
        electrical_power: power_kw,
        current,
    };
    let record = TraceRecord {
        t,
        v_target: target,
        v: body.speed,
        distance: body.distance,
        command,
        motor_torque: shaft_torque,
        motor_speed,
        friction_force: request.friction_force,
        battery_power: power_kw,
        current,
        voltage: battery.terminal_voltage,
        soc: battery.soc,
        rolling: forces.rolling,
        aero: forces.aero,
        accel,
    };
    let next = SimState {
        steps,
        t,
        body,
        battery,
        driver,
        last_forces: forces,
        last_motor,
        ledger,
    };
    Ok((next, record))
}

/// Number of `dt` steps needed to cover `time`.
pub fn steps_for(time: f64, dt: f64) -> u64 {
    if time <= 0.0 {
        0
    } else {
        (time / dt - 1e-9).ceil() as u64
    }
}

/// Run to a stop condition and keep every record.
pub fn run(
    config: &VehicleConfig,
    cycle: &DriveCycle,
    options: &RunOptions,
) -> Result<(SimTrace, SimSummary, EnergyLedger), SimError> {
    let mut trace = SimTrace::new();
    let (summary, ledger) = run_with_sink(config, cycle, options, &mut trace)?;
    Ok((trace, summary, ledger))
}

/// Run to a stop condition, streaming records into `sink`.
///
/// Stop conditions are checked before each step in priority order: SoC
/// floor, then time limit, then end of cycle (non-repeating runs only).
pub fn run_with_sink<S: TraceSink>(
    config: &VehicleConfig,
    cycle: &DriveCycle,
    options: &RunOptions,
    mut sink: S,
) -> Result<(SimSummary, EnergyLedger), SimError> {
    let dt = config.sim.dt;
    let max_steps = steps_for(options.max_time.unwrap_or(config.sim.max_sim_time), dt);
    let cycle_steps = steps_for(cycle.duration(), dt);
    let mut state = SimState::initial(config);
    let mut max_error: f64 = 0.0;

    let stop_reason = loop {
        if options
            .stop_at_soc
            .is_some_and(|floor| state.battery.soc <= floor)
        {
            break StopReason::SocFloor;
        }
        if state.steps >= max_steps {
            break StopReason::MaxTime;
        }
        if !options.repeat && state.steps >= cycle_steps {
            break StopReason::CycleEnd;
        }
        let (next, record) = step(&state, cycle, config, options)?;
        max_error = max_error.max((record.v - record.v_target).abs());
        sink.record(&record);
        state = next;
    };

    let peak = cycle.max_speed();
    let summary = SimSummary {
        duration: state.t,
        distance: state.body.distance,
        soc_start: config.battery.initial_soc,
        soc_end: state.battery.soc,
        max_tracking_error_kmh: max_error,
        max_tracking_error_pct: if peak > 0.0 {
            100.0 * max_error / peak
        } else {
            0.0
        },
        energy_out: state.battery.cumulative_energy_out,
        energy_regen: state.battery.cumulative_energy_regen,
        cycles_completed: (state.t / cycle.duration() + 1e-9).floor() as u64,
        stop_reason,
    };
    Ok((summary, state.ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::{self, DriveCycle};
    use approx::assert_relative_eq;

    #[test]
    fn zero_cycle_is_a_fixed_point() {
        let config = VehicleConfig::default();
        let cycle = cycle::constant(0.0, 20.0).unwrap();
        let (trace, summary, ledger) = run(&config, &cycle, &RunOptions::default()).unwrap();
        assert_eq!(trace.len(), 200);
        for (k, r) in trace.iter().enumerate() {
            assert_relative_eq!(r.t, (k + 1) as f64 * 0.1, max_relative = 1e-12);
            let zeros = [
                r.v_target,
                r.v,
                r.distance,
                r.command,
                r.motor_torque,
                r.motor_speed,
                r.friction_force,
                r.battery_power,
                r.current,
                r.rolling,
                r.aero,
                r.accel,
            ];
            assert!(zeros.iter().all(|&x| x == 0.0), "{r:?}");
            assert_eq!(r.soc, 0.9);
            assert_eq!(r.voltage, 350.0);
        }
        assert_eq!(summary.stop_reason, StopReason::CycleEnd);
        assert!(ledger_check(&ledger).pass);
        assert_eq!(ledger.residual, 0.0);
    }

    #[test]
    fn first_full_throttle_step_from_rest() {
        let config = VehicleConfig::default();
        let cycle = cycle::constant(100.0, 10.0).unwrap();
        let opts = RunOptions {
            driver: DriverMode::Fixed(1.0),
            ..Default::default()
        };
        let (_, rec) = step(&SimState::initial(&config), &cycle, &config, &opts).unwrap();
        let expected = 230.0 * 4.8 * 0.9 / 0.284 / 1549.0;
        assert_relative_eq!(rec.accel, expected, max_relative = 1e-12);
        assert_eq!((rec.accel * 1000.0).round() / 1000.0, 2.259);
        assert_eq!(rec.rolling, 0.0);
    }

    #[test]
    fn braking_without_regen_never_charges() {
        let config = VehicleConfig::default();
        let mut state = SimState::initial(&config);
        state.body.speed = 60.0;
        let cycle = cycle::constant(0.0, 10.0).unwrap();
        let opts = RunOptions {
            regen_enabled: false,
            ..Default::default()
        };
        let (next, rec) = step(&state, &cycle, &config, &opts).unwrap();
        assert!(rec.command < 0.0);
        assert!(rec.motor_torque < 0.0);
        assert!(next.battery.soc <= state.battery.soc);
        let (with_regen, _) = step(&state, &cycle, &config, &RunOptions::default()).unwrap();
        assert!(with_regen.battery.soc > state.battery.soc);
        // Same mechanics either way.
        assert_eq!(with_regen.body, next.body);
    }

    #[test]
    fn zero_max_time_gives_empty_trace() {
        let config = VehicleConfig::default();
        let opts = RunOptions {
            max_time: Some(0.0),
            ..Default::default()
        };
        let (trace, summary, _) = run(&config, &DriveCycle::udds(), &opts).unwrap();
        assert!(trace.is_empty());
        assert_eq!(summary.stop_reason, StopReason::MaxTime);
        assert_eq!(summary.duration, 0.0);
    }

    #[test]
    fn soc_floor_outranks_time_limit() {
        let mut config = VehicleConfig::default();
        config.battery.capacity_energy = 0.05;
        let opts = RunOptions {
            repeat: true,
            stop_at_soc: Some(0.1),
            max_time: Some(3000.0),
            ..Default::default()
        };
        let (_, summary, _) = run(&config, &DriveCycle::udds(), &opts).unwrap();
        assert_eq!(summary.stop_reason, StopReason::SocFloor);
        assert!(summary.soc_end <= 0.1);
        assert!(summary.distance > 0.0);
    }

    #[test]
    fn repeat_wraps_target() {
        let cycle = cycle::synth_trapezoid(36.0, 10.0, 10.0).unwrap();
        let opts = RunOptions {
            repeat: true,
            ..Default::default()
        };
        assert_eq!(opts.target_at(&cycle, 35.0), cycle.target_speed(5.0));
        assert_eq!(opts.target_at(&cycle, 30.0), cycle.target_speed(30.0));
        assert_eq!(opts.target_at(&cycle, 60.0), cycle.target_speed(30.0));
    }

    #[test]
    fn step_counts() {
        assert_eq!(steps_for(1369.0, 0.1), 13690);
        assert_eq!(steps_for(1369.0, 0.01), 136_900);
        assert_eq!(steps_for(0.0, 0.1), 0);
        assert_eq!(steps_for(0.05, 0.1), 1);
    }

    #[test]
    fn types_cross_threads() {
        fn check<T: Send + Sync>() {}
        check::<VehicleConfig>();
        check::<DriveCycle>();
        check::<SimState>();
        check::<SimSummary>();
        check::<TraceRecord>();
        check::<EnergyLedger>();
    }
}
