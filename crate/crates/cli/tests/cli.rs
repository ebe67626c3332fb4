use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clap::CommandFactory;
use evsim_cli::trace_csv::{trace_from_csv, TRACE_HEADER};
use evsim_cli::Cli;
use evsim_core::engine::{self, RunOptions};
use evsim_core::{DriveCycle, VehicleConfig};

fn evsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn every_flag_is_documented() {
    let mut cmd = Cli::command();
    cmd.build();
    for sub in cmd.get_subcommands() {
        assert!(sub.get_about().is_some(), "{} lacks help", sub.get_name());
        for arg in sub.get_arguments() {
            let id = arg.get_id().as_str();
            if id == "help" || id == "version" {
                continue;
            }
            assert!(
                arg.get_help().is_some(),
                "{} --{id} lacks help text",
                sub.get_name()
            );
        }
    }
}

#[test]
fn help_lists_flags() {
    let out = evsim(&["simulate", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--config",
        "--cycle",
        "--out",
        "--plot",
        "--no-regen",
        "--regen-eff",
        "--dt",
        "--every",
    ] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn missing_config_exits_1_and_names_file() {
    let out = evsim(&["simulate", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn invalid_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"body": {"mass": -1}}"#).unwrap();
    let out = evsim(&["validate", "--config", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass"));
    fs::write(&bad, r#"{"body": {"mas": 1}}"#).unwrap();
    assert_eq!(
        evsim(&["simulate", "--config", path_str(&bad)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(
        evsim(&["simulate", "--no-regen", "--regen-eff", "0.3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(evsim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(evsim(&["accel", "--target", "500"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_2() {
    let out = evsim(&["simulate", "--out", "/nonexistent-dir/trace.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn defaults_round_trip_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vehicle.json");
    let out = evsim(&["defaults"]);
    assert!(out.status.success());
    fs::write(&cfg, &out.stdout).unwrap();
    let out = evsim(&["validate", "--config", path_str(&cfg)]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["valid"], true);
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn simulate_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let out = evsim(&[
            "simulate",
            "--out",
            path_str(&csv),
            "--plot",
            path_str(&svg),
        ]);
        assert!(out.status.success());
        (out.stdout, fs::read(csv).unwrap(), fs::read(svg).unwrap())
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let summary: serde_json::Value = serde_json::from_slice(&a.0).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["ledger_check"]["pass"], true);
    let svg = String::from_utf8(a.2).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn trace_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    assert!(evsim(&["simulate", "--out", path_str(&csv)])
        .status
        .success());
    let parsed = trace_from_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    let (trace, ..) = engine::run(
        &VehicleConfig::default(),
        &DriveCycle::udds(),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(parsed.len(), trace.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * b.abs().max(1e-12);
    for (p, r) in parsed.iter().zip(&trace) {
        let pairs = [
            (p.t, r.t),
            (p.v_target, r.v_target),
            (p.v, r.v),
            (p.distance, r.distance),
            (p.command, r.command),
            (p.motor_torque, r.motor_torque),
            (p.motor_speed, r.motor_speed),
            (p.friction_force, r.friction_force),
            (p.battery_power, r.battery_power),
            (p.current, r.current),
            (p.voltage, r.voltage),
            (p.soc, r.soc),
            (p.rolling, r.rolling),
            (p.aero, r.aero),
            (p.accel, r.accel),
        ];
        for (a, b) in pairs {
            assert!(close(a, b), "t = {}: {a} vs {b}", r.t);
        }
    }
}

#[test]
fn three_step_run_gives_four_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cycle = dir.path().join("short.csv");
    fs::write(&cycle, "t_s,v_kmh\n0,0\n0.3,3\n").unwrap();
    let csv = dir.path().join("trace.csv");
    let out = evsim(&[
        "simulate",
        "--cycle",
        path_str(&cycle),
        "--out",
        path_str(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next(), Some(TRACE_HEADER));
}

#[test]
fn decimated_trace_keeps_every_nth_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    assert!(
        evsim(&["simulate", "--every", "10", "--out", path_str(&csv)])
            .status
            .success()
    );
    let rows = fs::read_to_string(&csv).unwrap().lines().count() - 1;
    assert_eq!(rows, 1369);
}

#[test]
fn compare_regen_reports_both_legs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    fs::write(&cfg, r#"{"battery": {"capacity_energy": 4.0}}"#).unwrap();
    let a = evsim(&[
        "range",
        "--config",
        path_str(&cfg),
        "--until-soc",
        "0.1",
        "--compare-regen",
    ]);
    let b = evsim(&[
        "compare-regen",
        "--config",
        path_str(&cfg),
        "--until-soc",
        "0.1",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let cmp = &doc["comparison"];
    assert!(cmp["gain_pct"].as_f64().unwrap() > 0.0);
    assert_eq!(cmp["with_regen"]["stop_reason"], "soc_floor");
    assert_eq!(doc["reference_gains_pct"].as_array().unwrap().len(), 3);
}

#[test]
fn range_plot_and_soc_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    fs::write(&cfg, r#"{"battery": {"capacity_energy": 2.0}}"#).unwrap();
    let svg = dir.path().join("range.svg");
    let out = evsim(&[
        "range",
        "--config",
        path_str(&cfg),
        "--plot",
        path_str(&svg),
        "--every",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.contains("distance (km)") && text.contains("state of charge"));
    let soc = dir.path().join("soc.svg");
    assert!(evsim(&["simulate", "--soc-plot", path_str(&soc)])
        .status
        .success());
    assert!(fs::read_to_string(&soc)
        .unwrap()
        .contains("state of charge"));
}

#[test]
fn empty_plot_writes_no_file() {
    use evsim_cli::plot::{trace_figure, PlotKind};
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("none.svg");
    assert!(evsim_cli::emit_plot(trace_figure(PlotKind::Tracking, &[]), &svg).is_err());
    assert!(!svg.exists());
}

#[test]
fn accel_and_topspeed_summaries() {
    let out = evsim(&["accel", "--target", "100"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let t = doc["time_to_target_s"].as_f64().unwrap();
    assert!(t > 14.0 && t < 17.0, "{t}");
    let out = evsim(&["topspeed"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["report"]["discrepancy_kmh"].as_f64().unwrap().abs() <= 2.0);
    let out = evsim(&["size-motor", "--speed", "100"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["power_kw"].as_f64().unwrap() - 19.18).abs() < 0.005);
}
