use serde::{Deserialize, Serialize};

/// One row of simulation output, emitted after each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// s
    pub t: f64,
    /// km/h
    pub v_target: f64,
    /// km/h
    pub v: f64,
    /// km
    pub distance: f64,
    pub command: f64,
    /// N·m, negative when generating.
    pub motor_torque: f64,
    /// rpm, step mean.
    pub motor_speed: f64,
    /// N
    pub friction_force: f64,
    /// kW at the terminals, negative when charging.
    pub battery_power: f64,
    /// A
    pub current: f64,
    /// V
    pub voltage: f64,
    pub soc: f64,
    /// N
    pub rolling: f64,
    /// N
    pub aero: f64,
    /// m/s²
    pub accel: f64,
}

pub type SimTrace = Vec<TraceRecord>;

/// Receives every record a run emits.
pub trait TraceSink {
    fn record(&mut self, record: &TraceRecord);
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, record: &TraceRecord) {
        self.push(*record);
    }
}

impl<S: TraceSink + ?Sized> TraceSink for &mut S {
    fn record(&mut self, record: &TraceRecord) {
        (**self).record(record);
    }
}

/// Drops everything; for runs where only the summary matters.
#[derive(Debug, Default, Clone, Copy)]
pub struct Discard;

impl TraceSink for Discard {
    fn record(&mut self, _: &TraceRecord) {}
}

/// Keeps the first record and every `every`-th one after it.
#[derive(Debug, Clone)]
pub struct Decimate {
    every: usize,
    seen: usize,
    pub records: SimTrace,
}

impl Decimate {
    pub fn new(every: usize) -> Self {
        Self {
            every: every.max(1),
            seen: 0,
            records: Vec::new(),
        }
    }
}

impl TraceSink for Decimate {
    fn record(&mut self, record: &TraceRecord) {
        if self.seen % self.every == 0 {
            self.records.push(*record);
        }
        self.seen += 1;
    }
}
