//! Trace CSV output with six significant digits.

use std::fmt::Write as _;

use evsim_core::TraceRecord;

pub const TRACE_HEADER: &str = "t_s,v_target_kmh,v_kmh,dist_km,cmd,motor_nm,motor_rpm,fric_n,batt_kw,current_a,volt_v,soc,rr_n,wr_n,accel_ms2";

const SIGNIFICANT: usize = 6;

/// `%g`-style formatting: six significant digits, trailing zeros dropped,
/// scientific notation outside `1e-5 ..< 1e6`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..SIGNIFICANT as i32).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fields(r: &TraceRecord) -> [f64; 15] {
    [
        r.t,
        r.v_target,
        r.v,
        r.distance,
        r.command,
        r.motor_torque,
        r.motor_speed,
        r.friction_force,
        r.battery_power,
        r.current,
        r.voltage,
        r.soc,
        r.rolling,
        r.aero,
        r.accel,
    ]
}

pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        for (i, x) in fields(r).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_sig(*x));
        }
        out.push('\n');
    }
    out
}

/// Read back a CSV written by [`trace_to_csv`].
pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRecord>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err("unexpected trace header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| format!("row {}: {e}", i + 1))?;
            if v.len() != 15 {
                return Err(format!(
                    "row {}: expected 15 fields, got {}",
                    i + 1,
                    v.len()
                ));
            }
            Ok(TraceRecord {
                t: v[0],
                v_target: v[1],
                v: v[2],
                distance: v[3],
                command: v[4],
                motor_torque: v[5],
                motor_speed: v[6],
                friction_force: v[7],
                battery_power: v[8],
                current: v[9],
                voltage: v[10],
                soc: v[11],
                rolling: v[12],
                aero: v[13],
                accel: v[14],
            })
        })
        .collect()
}
