//! Unit conversions between the documented config units and SI.
//!
//! Configs and formulas carry km/h, rpm, kW and kWh; the integrator works
//! in SI. Every conversion in the crate goes through here.

use std::f64::consts::PI;

/// km/h per m/s.
pub const KMH_PER_MS: f64 = 3.6;

/// Torque-speed-power constant: P[kW] = tau[N*m] * n[rpm] / 9550.
pub const POWER_CONSTANT: f64 = 9550.0;

/// Joules per kWh.
pub const J_PER_KWH: f64 = 3.6e6;

/// Seconds per hour.
pub const S_PER_H: f64 = 3600.0;

#[inline]
pub fn kmh_to_ms(v: f64) -> f64 {
    v / KMH_PER_MS
}

#[inline]
pub fn ms_to_kmh(v: f64) -> f64 {
    v * KMH_PER_MS
}

#[inline]
pub fn rpm_to_rad_s(n: f64) -> f64 {
    n * 2.0 * PI / 60.0
}

#[inline]
pub fn rad_s_to_rpm(w: f64) -> f64 {
    w * 60.0 / (2.0 * PI)
}

#[inline]
pub fn kw_to_w(p: f64) -> f64 {
    p * 1000.0
}

#[inline]
pub fn w_to_kw(p: f64) -> f64 {
    p / 1000.0
}

#[inline]
pub fn kwh_to_j(e: f64) -> f64 {
    e * J_PER_KWH
}

#[inline]
pub fn j_to_kwh(e: f64) -> f64 {
    e / J_PER_KWH
}

#[inline]
pub fn km_to_m(d: f64) -> f64 {
    d * 1000.0
}

#[inline]
pub fn m_to_km(d: f64) -> f64 {
    d / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    proptest! {
        #[test]
        fn round_trips_are_identity(x in 1e-6f64..1e7) {
            prop_assert!(rel(ms_to_kmh(kmh_to_ms(x)), x) <= 1e-9);
            prop_assert!(rel(rad_s_to_rpm(rpm_to_rad_s(x)), x) <= 1e-9);
            prop_assert!(rel(w_to_kw(kw_to_w(x)), x) <= 1e-9);
            prop_assert!(rel(j_to_kwh(kwh_to_j(x)), x) <= 1e-9);
            prop_assert!(rel(m_to_km(km_to_m(x)), x) <= 1e-9);
        }
    }

    #[test]
    fn power_constant_is_close_to_exact() {
        // 60000 / 2pi = 9549.3; the rounded constant is within 0.01 %.
        let exact = 60_000.0 / (2.0 * PI);
        assert!(rel(exact, POWER_CONSTANT) < 1e-4);
    }
}
