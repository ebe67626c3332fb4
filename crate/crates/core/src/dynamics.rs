//! Road-load forces, net acceleration, and the speed/distance integrator.
//!
//! Speeds are km/h at the API (the road-load formulas are calibrated in
//! km/h); the integrator converts to SI internally.

use serde::Serialize;

use crate::params::VehicleBodyParams;
use crate::units;

/// Dynamic pressure constant for drag with speed in km/h and force in N.
const DRAG_CONSTANT: f64 = 21.15;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BodyState {
    /// km/h
    pub speed: f64,
    /// km
    pub distance: f64,
    /// m/s², from the last integration step.
    pub acceleration: f64,
}

/// Longitudinal forces on the vehicle, all non-negative magnitudes in N
/// except `net`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ForceBreakdown {
    pub propulsion: f64,
    pub regen_brake: f64,
    pub friction_brake: f64,
    pub rolling: f64,
    pub aero: f64,
    pub net: f64,
}

impl ForceBreakdown {
    /// Assemble the breakdown at speed `v` km/h. Road load only acts on a
    /// moving vehicle.
    pub fn resolve(
        body: &VehicleBodyParams,
        v: f64,
        propulsion: f64,
        regen_brake: f64,
        friction_brake: f64,
    ) -> Self {
        let (rolling, aero) = if v > 0.0 {
            (rolling_resistance(body, v), aero_drag(body, v))
        } else {
            (0.0, 0.0)
        };
        Self {
            propulsion,
            regen_brake,
            friction_brake,
            rolling,
            aero,
            net: propulsion - regen_brake - friction_brake - rolling - aero,
        }
    }

    /// Driving force net of braking, before road load.
    pub fn driving(&self) -> f64 {
        self.propulsion - self.regen_brake - self.friction_brake
    }
}

/// `m g (f0 + f1 (v/100) + f4 (v/100)^4)`, v in km/h.
pub fn rolling_resistance(body: &VehicleBodyParams, v: f64) -> f64 {
    let x = v / 100.0;
    body.mass * body.gravity * (body.f0 + body.f1 * x + body.f4 * x.powi(4))
}

/// `Cd A v² / 21.15`, v in km/h.
pub fn aero_drag(body: &VehicleBodyParams, v: f64) -> f64 {
    body.drag_coefficient * body.frontal_area * v * v / DRAG_CONSTANT
}

/// Net force over mass, m/s².
pub fn acceleration(forces: &ForceBreakdown, mass: f64) -> f64 {
    forces.net / mass
}

/// Acceleration of the body at speed `v`, holding a stationary vehicle until
/// the driving force beats static rolling resistance. A stopped vehicle
/// never creeps backwards.
pub fn body_acceleration(forces: &ForceBreakdown, body: &VehicleBodyParams, v: f64) -> f64 {
    if v <= 0.0 && forces.driving() <= rolling_resistance(body, 0.0) {
        return 0.0;
    }
    acceleration(forces, body.mass)
}

/// Semi-implicit Euler: speed first, clamped at zero, then distance with the
/// new speed.
pub fn integrate(state: BodyState, a: f64, dt: f64) -> BodyState {
    let speed = (state.speed + units::ms_to_kmh(a * dt)).max(0.0);
    BodyState {
        speed,
        distance: state.distance + units::m_to_km(units::kmh_to_ms(speed) * dt),
        acceleration: a,
    }
}

/// Distance in metres covered during a step from `v0` to `v1` km/h under
/// constant `a`: mean speed times elapsed time, with the exact stopping
/// time when the speed was clamped to zero. Work terms computed over this
/// displacement sum exactly to the kinetic energy change.
pub fn work_displacement(v0: f64, v1: f64, a: f64, dt: f64) -> f64 {
    let (u0, u1) = (units::kmh_to_ms(v0), units::kmh_to_ms(v1));
    let expected = u0 + a * dt;
    if u1 == 0.0 && expected < 0.0 && a < 0.0 {
        let stop = u0 / -a;
        0.5 * u0 * stop
    } else {
        0.5 * (u0 + u1) * dt
    }
}
