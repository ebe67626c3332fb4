//! Reference models written from the physics alone, sharing no code with
//! the engine: a fine-step full-throttle integrator and a force-balance
//! root finder.

#![allow(dead_code)]

use evsim_core::VehicleConfig;

const G_DRAG: f64 = 21.15;

fn wheel_rpm_factor(c: &VehicleConfig) -> f64 {
    // motor rpm per (m/s)
    c.drivetrain.gear_ratio * 60.0 / (2.0 * std::f64::consts::PI * c.body.wheel_radius)
}

/// Peak wheel force in N at `u` m/s.
pub fn tractive_force(c: &VehicleConfig, u: f64) -> f64 {
    let n = u * wheel_rpm_factor(c);
    let torque = if n > c.motor.max_speed {
        0.0
    } else if n <= 0.0 {
        c.motor.max_torque
    } else {
        c.motor.max_torque.min(9550.0 * c.motor.max_power / n)
    };
    torque * c.drivetrain.gear_ratio * c.drivetrain.transmission_efficiency / c.body.wheel_radius
}

/// Rolling plus aerodynamic resistance in N at `u` m/s.
pub fn road_load(c: &VehicleConfig, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let b = &c.body;
    let v = u * 3.6;
    let x = v / 100.0;
    b.mass * b.gravity * (b.f0 + b.f1 * x + b.f4 * x.powi(4))
        + b.drag_coefficient * b.frontal_area * v * v / G_DRAG
}

/// Seconds from rest to `target_kmh` at full throttle, integrated at `dt`
/// with the classical fourth-order scheme and a linear crossing.
pub fn accel_time(c: &VehicleConfig, target_kmh: f64, dt: f64) -> Option<f64> {
    let target = target_kmh / 3.6;
    let a = |u: f64| (tractive_force(c, u) - road_load(c, u)) / c.body.mass;
    let (mut t, mut u) = (0.0, 0.0);
    while t < 3600.0 {
        let k1 = a(u);
        let k2 = a(u + 0.5 * dt * k1);
        let k3 = a(u + 0.5 * dt * k2);
        let k4 = a(u + dt * k3);
        let next = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if next >= target {
            return Some(t + dt * (target - u) / (next - u));
        }
        if next <= u {
            return None;
        }
        u = next;
        t += dt;
    }
    None
}

/// Speed in km/h where peak tractive force meets road load, or the motor
/// speed cap when the force balance lies beyond it.
pub fn top_speed(c: &VehicleConfig) -> f64 {
    let cap = c.motor.max_speed / wheel_rpm_factor(c);
    let surplus = |u: f64| tractive_force(c, u) - road_load(c, u);
    if surplus(cap) >= 0.0 {
        return cap * 3.6;
    }
    let (mut lo, mut hi) = (1e-9, cap);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if surplus(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) * 3.6
}
