//! Error types for every fallible operation in the crate.

use std::fmt;

use thiserror::Error;

/// A single violated constraint on a configuration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Dotted path of the offending field, e.g. `body.mass`.
    pub field: String,
    /// The constraint that failed, e.g. `mass > 0`.
    pub constraint: String,
}

impl Violation {
    pub(crate) fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("missing or wrong header, expected `t_s,v_kmh`")]
    Header,
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: time {time} s does not increase on the previous sample")]
    NonMonotonicTime { row: usize, time: f64 },
    #[error("row {row}: negative speed {speed} km/h")]
    NegativeSpeed { row: usize, speed: f64 },
    #[error("first sample must be at t = 0 s, found {0} s")]
    NonZeroStart(f64),
    #[error("a cycle needs at least 2 samples, found {0}")]
    TooFewSamples(usize),
    #[error("invalid cycle parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SimError {
    #[error("motor speed {speed:.1} rpm exceeds the envelope maximum {max:.1} rpm")]
    Envelope { speed: f64, max: f64 },
    #[error("battery terminal voltage {0:.3} V is degenerate")]
    DegenerateVoltage(f64),
    #[error("electrical demand {power_kw:.1} kW exceeds what the pack can deliver")]
    PowerBeyondPack { power_kw: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ExperimentError {
    #[error(
        "target {target_kmh} km/h is unreachable, force balance caps speed at {vmax_kmh:.2} km/h"
    )]
    UnreachableTarget { target_kmh: f64, vmax_kmh: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}
