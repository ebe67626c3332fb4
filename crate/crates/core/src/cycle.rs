//! Target-speed schedules: parsing, interpolation and statistics.
//!
//! A cycle is a list of `(time s, speed km/h)` knots with strictly
//! increasing times starting at zero. Between knots the target is linearly
//! interpolated; past the last knot it holds the last speed.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::CycleError;
use crate::units;

const HEADER: &str = "t_s,v_kmh";

/// The EPA Urban Dynamometer Driving Schedule, 1 Hz, km/h.
pub const UDDS_CSV: &str = include_str!("../data/udds.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    /// s
    pub time: f64,
    /// km/h
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    name: String,
    samples: Vec<Sample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleStats {
    /// s
    pub duration: f64,
    /// km
    pub distance: f64,
    /// km/h
    pub max_speed: f64,
    /// km/h
    pub mean_speed: f64,
}

impl DriveCycle {
    /// Build a cycle from samples, checking every invariant.
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Result<Self, CycleError> {
        if samples.len() < 2 {
            return Err(CycleError::TooFewSamples(samples.len()));
        }
        for (i, s) in samples.iter().enumerate() {
            let row = i + 1;
            if !s.time.is_finite() || !s.speed.is_finite() {
                return Err(CycleError::MalformedRow {
                    row,
                    reason: "non-finite value".into(),
                });
            }
            if s.speed < 0.0 {
                return Err(CycleError::NegativeSpeed {
                    row,
                    speed: s.speed,
                });
            }
            if i > 0 && s.time <= samples[i - 1].time {
                return Err(CycleError::NonMonotonicTime { row, time: s.time });
            }
        }
        if samples[0].time != 0.0 {
            return Err(CycleError::NonZeroStart(samples[0].time));
        }
        Ok(Self {
            name: name.into(),
            samples,
        })
    }

    /// The bundled UDDS schedule.
    pub fn udds() -> Self {
        parse_cycle_named(UDDS_CSV, "UDDS").expect("bundled UDDS data is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].time
    }

    pub fn max_speed(&self) -> f64 {
        self.samples.iter().map(|s| s.speed).fold(0.0, f64::max)
    }

    /// Target speed in km/h at `t` seconds.
    pub fn target_speed(&self, t: f64) -> f64 {
        let s = &self.samples;
        // Index of the first knot strictly after t.
        let hi = s.partition_point(|k| k.time <= t);
        if hi == 0 {
            return s[0].speed;
        }
        if hi == s.len() {
            return s[s.len() - 1].speed;
        }
        let (a, b) = (s[hi - 1], s[hi]);
        if t == a.time {
            return a.speed;
        }
        a.speed + (b.speed - a.speed) * (t - a.time) / (b.time - a.time)
    }

    /// Largest absolute segment slope, km/h per s.
    pub fn max_slope(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| ((w[1].speed - w[0].speed) / (w[1].time - w[0].time)).abs())
            .fold(0.0, f64::max)
    }

    pub fn stats(&self) -> CycleStats {
        cycle_stats(self)
    }

    /// CSV in the `t_s,v_kmh` format; parsing it back reproduces every
    /// sample bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 16);
        out.push_str(HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(out, "{},{}", s.time, s.speed);
        }
        out
    }

    /// `n` back-to-back copies. The seam knot shared by consecutive copies is
    /// written once, so the result is exact when the cycle ends at the speed
    /// it starts with.
    pub fn repeat(&self, n: usize) -> Result<Self, CycleError> {
        if n == 0 {
            return Err(CycleError::InvalidParameter(
                "repeat count must be at least 1",
            ));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let d = self.duration();
        let mut samples = Vec::with_capacity(self.samples.len() * n);
        samples.extend_from_slice(&self.samples);
        for k in 1..n {
            let offset = k as f64 * d;
            samples.extend(self.samples[1..].iter().map(|s| Sample {
                time: s.time + offset,
                speed: s.speed,
            }));
        }
        Self::new(format!("{} x{n}", self.name), samples)
    }
}

pub fn parse_cycle(text: &str) -> Result<DriveCycle, CycleError> {
    parse_cycle_named(text, "custom")
}

pub fn parse_cycle_named(text: &str, name: &str) -> Result<DriveCycle, CycleError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        _ => return Err(CycleError::Header),
    }
    let mut samples: Vec<Sample> = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(t), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CycleError::MalformedRow {
                row,
                reason: format!("expected 2 fields in `{line}`"),
            });
        };
        let parse = |field: &str, what: &str| {
            field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CycleError::MalformedRow {
                    row,
                    reason: format!("bad {what} `{}`", field.trim()),
                })
        };
        let time = parse(t, "time")?;
        let speed = parse(v, "speed")?;
        if let Some(prev) = samples.last() {
            if time <= prev.time {
                return Err(CycleError::NonMonotonicTime { row, time });
            }
        }
        if speed < 0.0 {
            return Err(CycleError::NegativeSpeed { row, speed });
        }
        samples.push(Sample { time, speed });
    }
    DriveCycle::new(name, samples)
}

pub fn target_speed(cycle: &DriveCycle, t: f64) -> f64 {
    cycle.target_speed(t)
}

/// Duration, trapezoidal distance, and peak and mean speed.
pub fn cycle_stats(cycle: &DriveCycle) -> CycleStats {
    let hours_km: f64 = cycle
        .samples
        .windows(2)
        .map(|w| 0.5 * (w[0].speed + w[1].speed) * (w[1].time - w[0].time))
        .sum();
    let distance = hours_km / units::S_PER_H;
    let duration = cycle.duration();
    CycleStats {
        duration,
        distance,
        max_speed: cycle.max_speed(),
        mean_speed: distance / duration * units::S_PER_H,
    }
}

pub fn repeat(cycle: &DriveCycle, n: usize) -> Result<DriveCycle, CycleError> {
    cycle.repeat(n)
}

/// Ramp from rest to `peak` km/h over `ramp` s, hold for `hold` s, ramp back.
pub fn synth_trapezoid(peak: f64, ramp: f64, hold: f64) -> Result<DriveCycle, CycleError> {
    if !(peak >= 0.0 && peak.is_finite()) {
        return Err(CycleError::InvalidParameter("peak must be ≥ 0"));
    }
    if !(ramp > 0.0 && ramp.is_finite()) {
        return Err(CycleError::InvalidParameter("ramp must be > 0"));
    }
    if !(hold >= 0.0 && hold.is_finite()) {
        return Err(CycleError::InvalidParameter("hold must be ≥ 0"));
    }
    let mut samples = vec![
        Sample {
            time: 0.0,
            speed: 0.0,
        },
        Sample {
            time: ramp,
            speed: peak,
        },
    ];
    if hold > 0.0 {
        samples.push(Sample {
            time: ramp + hold,
            speed: peak,
        });
    }
    samples.push(Sample {
        time: 2.0 * ramp + hold,
        speed: 0.0,
    });
    DriveCycle::new(format!("trapezoid {peak} km/h"), samples)
}

/// A cycle holding `speed` km/h for `duration` s.
pub fn constant(speed: f64, duration: f64) -> Result<DriveCycle, CycleError> {
    DriveCycle::new(
        format!("constant {speed} km/h"),
        vec![
            Sample { time: 0.0, speed },
            Sample {
                time: duration,
                speed,
            },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn parses_small_cycle() {
        let c = parse_cycle("t_s,v_kmh\n0,0\n1,5\n2,10").unwrap();
        assert_eq!(c.samples().len(), 3);
        assert_eq!(c.duration(), 2.0);
    }

    #[test]
    fn udds_shape() {
        let c = DriveCycle::udds();
        assert_eq!(c.samples().len(), 1370);
        assert_eq!(c.duration(), 1369.0);
        let s = c.stats();
        assert_relative_eq!(s.distance, 11.99, epsilon = 0.005);
        assert_relative_eq!(s.max_speed, 91.25, epsilon = 0.01);
        assert!(s.max_speed >= s.mean_speed && s.mean_speed > 0.0);
    }

    #[test]
    fn non_monotonic_time_reports_row() {
        let err = parse_cycle("t_s,v_kmh\n3,0\n2,0").unwrap_err();
        assert_eq!(err, CycleError::NonMonotonicTime { row: 2, time: 2.0 });
        let err = parse_cycle("t_s,v_kmh\n0,0\n1,1\n1,2").unwrap_err();
        assert_eq!(err, CycleError::NonMonotonicTime { row: 3, time: 1.0 });
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_cycle("time,speed\n0,0\n1,1"), Err(CycleError::Header));
        assert!(matches!(
            parse_cycle("t_s,v_kmh\n0,0\n1,abc"),
            Err(CycleError::MalformedRow { row: 2, .. })
        ));
        assert!(matches!(
            parse_cycle("t_s,v_kmh\n0,0\n1,2,3"),
            Err(CycleError::MalformedRow { row: 2, .. })
        ));
        assert!(matches!(
            parse_cycle("t_s,v_kmh\n0,0\n1,-2"),
            Err(CycleError::NegativeSpeed { row: 2, .. })
        ));
        assert_eq!(
            parse_cycle("t_s,v_kmh\n0,0"),
            Err(CycleError::TooFewSamples(1))
        );
        assert_eq!(
            parse_cycle("t_s,v_kmh\n1,0\n2,0"),
            Err(CycleError::NonZeroStart(1.0))
        );
    }

    #[test]
    fn interpolation() {
        let c = parse_cycle("t_s,v_kmh\n0,0\n2,10").unwrap();
        assert_eq!(c.target_speed(1.0), 5.0);
        assert_eq!(c.target_speed(2.0), 10.0);
        assert_eq!(c.target_speed(50.0), 10.0);
        let udds = DriveCycle::udds();
        assert_eq!(udds.target_speed(2000.0), 0.0);
        for s in udds.samples() {
            assert_eq!(udds.target_speed(s.time), s.speed);
        }
    }

    #[test]
    fn trapezoid_distance() {
        let c = synth_trapezoid(36.0, 10.0, 10.0).unwrap();
        assert_eq!(c.samples().len(), 4);
        assert_eq!(c.duration(), 30.0);
        // 10 m/s peak: two 50 m ramps and 100 m at speed.
        assert_relative_eq!(c.stats().distance, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn trapezoid_edge_cases() {
        let flat = synth_trapezoid(0.0, 10.0, 10.0).unwrap();
        assert!(flat.samples().iter().all(|s| s.speed == 0.0));
        assert_eq!(flat.stats().distance, 0.0);
        let accel = synth_trapezoid(100.0, 9.5, 0.0).unwrap();
        assert_eq!(accel.samples().len(), 3);
        assert_eq!(accel.target_speed(9.5), 100.0);
        assert!(synth_trapezoid(10.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn repeat_udds() {
        let udds = DriveCycle::udds();
        let twice = udds.repeat(2).unwrap();
        assert_eq!(twice.duration(), 2738.0);
        assert_eq!(udds.repeat(1).unwrap(), udds);
        assert!(udds.repeat(0).is_err());
        assert_relative_eq!(
            twice.stats().distance,
            2.0 * udds.stats().distance,
            max_relative = 1e-9
        );
    }

    fn arb_cycle() -> impl Strategy<Value = DriveCycle> {
        prop::collection::vec((0.01f64..30.0, 0.0f64..130.0), 1..40).prop_map(|steps| {
            let mut t = 0.0;
            let mut samples = vec![Sample {
                time: 0.0,
                speed: 0.0,
            }];
            for (dt, v) in steps {
                t += dt;
                samples.push(Sample { time: t, speed: v });
            }
            DriveCycle::new("arb", samples).unwrap()
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(c in arb_cycle()) {
            let back = parse_cycle(&c.to_csv()).unwrap();
            prop_assert_eq!(back.samples(), c.samples());
        }

        #[test]
        fn target_is_lipschitz(c in arb_cycle(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let d = c.duration();
            let (t1, t2) = (a.min(b) * d, a.max(b) * d);
            let l = c.max_slope();
            let dv = (c.target_speed(t1) - c.target_speed(t2)).abs();
            prop_assert!(dv <= l * (t2 - t1) * (1.0 + 1e-9) + 1e-9);
        }

        #[test]
        fn repeat_distance_is_linear(mut c in arb_cycle(), n in 1usize..6) {
            // Close the cycle so the seam is exact.
            let mut samples = c.samples().to_vec();
            let last = samples.last().unwrap().time;
            samples.push(Sample { time: last + 1.0, speed: 0.0 });
            c = DriveCycle::new("closed", samples).unwrap();
            let r = c.repeat(n).unwrap();
            prop_assert!((r.duration() - n as f64 * c.duration()).abs() <= 1e-9 * r.duration());
            let (one, many) = (c.stats().distance, r.stats().distance);
            prop_assert!((many - n as f64 * one).abs() <= 1e-9 * many.max(1e-300));
        }
    }
}
