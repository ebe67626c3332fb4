//! Scripted scenarios on top of the engine: range on a repeated cycle, the
//! regenerative-braking range gain, full-throttle acceleration and top
//! speed, motor sizing, and SoC dynamics analysis.

use std::thread;

use serde::Serialize;

use crate::cycle::{self, DriveCycle};
use crate::dynamics::{aero_drag, rolling_resistance};
use crate::engine::{
    self, Discard, DriverMode, EnergyLedger, RunOptions, SimState, SimSummary, StopReason,
    TraceRecord, TraceSink,
};
use crate::error::ExperimentError;
use crate::params::{speed_at_max_motor_rpm, VehicleConfig};
use crate::units::{self, POWER_CONSTANT};

/// Range gains from regenerative braking published for the reference
/// vehicle, in percent, kept for side-by-side reporting.
pub const REFERENCE_REGEN_GAINS_PCT: [f64; 3] = [23.0, 25.0, 25.5];
/// Published reference figures for the same vehicle, for reporting only.
pub const REFERENCE_RANGE_KM: f64 = 352.0;
pub const REFERENCE_RANGE_NO_REGEN_KM: f64 = 286.0;
pub const REFERENCE_ZERO_TO_100_S: f64 = 9.5;
pub const REFERENCE_TOP_SPEED_KMH: f64 = 190.0;
pub const REFERENCE_SIZING_KW: f64 = 29.48;

/// Bisection tolerance for speed roots, km/h.
const SPEED_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeReport {
    pub distance_km: f64,
    pub cycles_completed: u64,
    pub soc_start: f64,
    pub soc_end: f64,
    pub energy_out_kwh: f64,
    pub energy_regen_kwh: f64,
    pub regen_enabled: bool,
    pub duration_s: f64,
    pub stop_reason: StopReason,
}

impl RangeReport {
    fn from_summary(summary: &SimSummary, regen_enabled: bool) -> Self {
        Self {
            distance_km: summary.distance,
            cycles_completed: summary.cycles_completed,
            soc_start: summary.soc_start,
            soc_end: summary.soc_end,
            energy_out_kwh: summary.energy_out,
            energy_regen_kwh: summary.energy_regen,
            regen_enabled,
            duration_s: summary.duration,
            stop_reason: summary.stop_reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegenComparison {
    pub with_regen: RangeReport,
    pub without_regen: RangeReport,
    /// range with / range without
    pub ratio: f64,
    pub gain_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccelReport {
    pub time_to_target_s: f64,
    pub target_kmh: f64,
    /// (s, km/h)
    pub speed_trajectory: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopSpeedReport {
    pub vmax_kmh: f64,
    /// First time the speed came within 1 km/h of `vmax_kmh`.
    pub time_to_vmax_s: f64,
    pub oracle_vmax_kmh: f64,
    pub discrepancy_kmh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SocEvent {
    /// s, end of the step
    pub t: f64,
    pub delta_soc: f64,
    pub command: f64,
    /// km/h at the start of the step
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocDynamicsReport {
    /// SoC change over each (possibly partial) lap of the cycle.
    pub per_cycle_delta: Vec<f64>,
    /// Every step in which SoC rose.
    pub increase_events: Vec<SocEvent>,
    /// Increase events not explained by braking above the cutoff speed.
    pub unexplained: Vec<SocEvent>,
}

impl SocDynamicsReport {
    pub fn consistent(&self) -> bool {
        self.unexplained.is_empty()
    }
}

fn range_options(regen_enabled: bool, soc_floor: f64) -> RunOptions {
    RunOptions {
        regen_enabled,
        repeat: true,
        stop_at_soc: Some(soc_floor),
        ..Default::default()
    }
}

/// Drive `cycle` back to back until SoC reaches `soc_floor`.
pub fn range_test(
    config: &VehicleConfig,
    cycle: &DriveCycle,
    regen_enabled: bool,
    soc_floor: f64,
) -> Result<RangeReport, ExperimentError> {
    range_run(config, cycle, regen_enabled, soc_floor, Discard).map(|(report, _)| report)
}

/// [`range_test`] with the trace streamed into `sink` and the ledger kept.
pub fn range_run<S: TraceSink>(
    config: &VehicleConfig,
    cycle: &DriveCycle,
    regen_enabled: bool,
    soc_floor: f64,
    sink: S,
) -> Result<(RangeReport, EnergyLedger), ExperimentError> {
    let options = range_options(regen_enabled, soc_floor);
    let (summary, ledger) = engine::run_with_sink(config, cycle, &options, sink)?;
    Ok((RangeReport::from_summary(&summary, regen_enabled), ledger))
}

/// Range with and without energy recovery; the two legs run in parallel.
pub fn regen_comparison(
    config: &VehicleConfig,
    cycle: &DriveCycle,
    soc_floor: f64,
) -> Result<RegenComparison, ExperimentError> {
    let (on, off) = thread::scope(|s| {
        let on = s.spawn(|| range_test(config, cycle, true, soc_floor));
        let off = range_test(config, cycle, false, soc_floor);
        (on.join().expect("range leg panicked"), off)
    });
    Ok(compare(on?, off?))
}

pub fn compare(with_regen: RangeReport, without_regen: RangeReport) -> RegenComparison {
    let ratio = with_regen.distance_km / without_regen.distance_km;
    RegenComparison {
        with_regen,
        without_regen,
        ratio,
        gain_pct: 100.0 * (ratio - 1.0),
    }
}

fn full_throttle() -> RunOptions {
    RunOptions {
        driver: DriverMode::Fixed(1.0),
        ..Default::default()
    }
}

/// Time from rest to `target_kmh` at full throttle, interpolated between
/// steps.
pub fn accel_test(config: &VehicleConfig, target_kmh: f64) -> Result<AccelReport, ExperimentError> {
    let mut trajectory = vec![(0.0, 0.0)];
    if target_kmh <= 0.0 {
        return Ok(AccelReport {
            time_to_target_s: 0.0,
            target_kmh,
            speed_trajectory: trajectory,
        });
    }
    let vmax = top_speed_oracle(config);
    let unreachable = ExperimentError::UnreachableTarget {
        target_kmh,
        vmax_kmh: vmax,
    };
    if target_kmh >= vmax {
        return Err(unreachable);
    }

    let cycle = cycle::constant(target_kmh, 1.0).expect("constant cycle is valid");
    let options = full_throttle();
    let max_steps = engine::steps_for(config.sim.max_sim_time, config.sim.dt);
    let mut state = SimState::initial(config);
    while state.steps < max_steps {
        let (next, _) = engine::step(&state, &cycle, config, &options)?;
        let (v0, v1) = (state.body.speed, next.body.speed);
        trajectory.push((next.t, v1));
        if v1 >= target_kmh {
            let frac = (target_kmh - v0) / (v1 - v0);
            return Ok(AccelReport {
                time_to_target_s: state.t + frac * (next.t - state.t),
                target_kmh,
                speed_trajectory: trajectory,
            });
        }
        state = next;
    }
    Err(unreachable)
}

/// Full throttle for `duration_s`; the settled speed is the final one.
pub fn top_speed_test(
    config: &VehicleConfig,
    duration_s: f64,
) -> Result<TopSpeedReport, ExperimentError> {
    let (trace, ..) = top_speed_trace(config, duration_s)?;
    Ok(top_speed_report(config, &trace))
}

/// The full-throttle trace behind [`top_speed_test`].
pub fn top_speed_trace(
    config: &VehicleConfig,
    duration_s: f64,
) -> Result<(Vec<TraceRecord>, SimSummary), ExperimentError> {
    let target = speed_at_max_motor_rpm(config);
    let cycle = cycle::constant(target, duration_s.max(config.sim.dt)).expect("valid cycle");
    let options = RunOptions {
        max_time: Some(duration_s),
        ..full_throttle()
    };
    let (trace, summary, _) = engine::run(config, &cycle, &options)?;
    Ok((trace, summary))
}

pub fn top_speed_report(config: &VehicleConfig, trace: &[TraceRecord]) -> TopSpeedReport {
    let vmax = trace.last().map_or(0.0, |r| r.v);
    let time_to_vmax_s = trace
        .iter()
        .find(|r| r.v >= vmax - 1.0)
        .map_or(0.0, |r| r.t);
    let oracle = top_speed_oracle(config);
    TopSpeedReport {
        vmax_kmh: vmax,
        time_to_vmax_s,
        oracle_vmax_kmh: oracle,
        discrepancy_kmh: vmax - oracle,
    }
}

/// Peak tractive force at the wheels (N) at `v` km/h: torque-limited below
/// base speed, `eta_t * P_max / v` above it.
fn tractive_force_limit(config: &VehicleConfig, v: f64) -> f64 {
    let m = &config.motor;
    let d = &config.drivetrain;
    let torque_limited =
        m.max_torque * d.gear_ratio * d.transmission_efficiency / config.body.wheel_radius;
    if v <= 0.0 {
        return torque_limited;
    }
    // Same 9550 convention as the motor envelope.
    let wheel_rpm = units::rad_s_to_rpm(units::kmh_to_ms(v) / config.body.wheel_radius);
    let power_limited = POWER_CONSTANT * m.max_power / (wheel_rpm * d.gear_ratio)
        * d.gear_ratio
        * d.transmission_efficiency
        / config.body.wheel_radius;
    torque_limited.min(power_limited)
}

fn road_load(config: &VehicleConfig, v: f64) -> f64 {
    rolling_resistance(&config.body, v) + aero_drag(&config.body, v)
}

/// Force-balance top speed in km/h: the root of tractive limit = road load,
/// found by bisection and capped at the speed where the motor hits its
/// maximum rpm.
pub fn top_speed_oracle(config: &VehicleConfig) -> f64 {
    let cap = speed_at_max_motor_rpm(config);
    let surplus = |v: f64| tractive_force_limit(config, v) - road_load(config, v);
    if surplus(cap) >= 0.0 {
        return cap;
    }
    if surplus(f64::MIN_POSITIVE) <= 0.0 {
        return 0.0;
    }
    bisect(0.0, cap, |v| surplus(v) > 0.0)
}

/// Largest `v` in `[lo, hi]` with `below(v)` true, to within the tolerance;
/// `below` must be true then false across the interval.
fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > SPEED_TOLERANCE / 4.0 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Road-load power in kW at `design_speed` km/h: `v (RR + WR) / 3600`.
pub fn size_motor(config: &VehicleConfig, design_speed: f64) -> f64 {
    design_speed * road_load(config, design_speed) / units::S_PER_H
}

/// The design speed at which [`size_motor`] returns `power_kw`.
pub fn design_speed_for_power(config: &VehicleConfig, power_kw: f64) -> f64 {
    if power_kw <= 0.0 {
        return 0.0;
    }
    let mut hi = 100.0;
    while size_motor(config, hi) < power_kw && hi < 1e6 {
        hi *= 2.0;
    }
    bisect(0.0, hi, |v| size_motor(config, v) < power_kw)
}

/// Find every step where SoC rose and check it coincides with braking above
/// the regen cutoff. Needs an undecimated trace from rest.
pub fn soc_dynamics_report(
    trace: &[TraceRecord],
    initial_soc: f64,
    cycle_duration: f64,
    regen_cutoff_speed: f64,
) -> SocDynamicsReport {
    let mut increase_events = Vec::new();
    let mut unexplained = Vec::new();
    let mut per_cycle_delta = Vec::new();
    let (mut prev_soc, mut prev_speed) = (initial_soc, 0.0);
    let mut lap_start_soc = initial_soc;
    let mut lap = 0u64;

    for r in trace {
        let this_lap = ((r.t / cycle_duration) - 1e-9).floor().max(0.0) as u64;
        if this_lap != lap {
            per_cycle_delta.push(prev_soc - lap_start_soc);
            lap_start_soc = prev_soc;
            lap = this_lap;
        }
        if r.soc > prev_soc {
            let event = SocEvent {
                t: r.t,
                delta_soc: r.soc - prev_soc,
                command: r.command,
                speed: prev_speed,
            };
            increase_events.push(event);
            if !(r.command < 0.0 && prev_speed > regen_cutoff_speed) {
                unexplained.push(event);
            }
        }
        prev_soc = r.soc;
        prev_speed = r.v;
    }
    if !trace.is_empty() {
        per_cycle_delta.push(prev_soc - lap_start_soc);
    }
    SocDynamicsReport {
        per_cycle_delta,
        increase_events,
        unexplained,
    }
}
