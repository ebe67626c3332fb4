//! Command-line front end: loads a vehicle config and a drive cycle, runs a
//! scenario, prints a JSON summary and optionally writes a trace CSV and an
//! SVG plot.

pub mod plot;
pub mod trace_csv;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use evsim_core::engine::{self, Decimate, Discard, RunOptions};
use evsim_core::experiments::{self, REFERENCE_REGEN_GAINS_PCT};
use evsim_core::{cycle, ledger_check, DriveCycle, ExperimentError, TraceRecord, VehicleConfig};

use plot::{Figure, PlotKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "evsim",
    version,
    about = "Longitudinal battery-electric vehicle simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drive one pass of a cycle with the PI driver
    Simulate(SimulateArgs),
    /// Repeat a cycle until the battery reaches a state-of-charge floor
    Range(RangeArgs),
    /// Time a full-throttle run from rest to a target speed
    Accel(AccelArgs),
    /// Hold full throttle and report the settled top speed
    Topspeed(TopSpeedArgs),
    /// Range with and without regenerative braking, and the gain
    CompareRegen(CompareArgs),
    /// Road-load power needed to cruise at a design speed
    SizeMotor(SizeArgs),
    /// Print the default vehicle config as JSON
    Defaults,
    /// Check a config (and optionally a cycle) and print derived quantities
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct VehicleArgs {
    /// Vehicle config JSON; omitted fields take their defaults
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override the integration time step, s
    #[arg(long, value_name = "S")]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CycleArgs {
    /// Drive cycle CSV (`t_s,v_kmh`); defaults to the bundled UDDS
    #[arg(long, value_name = "PATH")]
    pub cycle: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegenArgs {
    /// Keep motor braking but store none of the recovered energy
    #[arg(long, conflicts_with = "regen_eff")]
    pub no_regen: bool,
    /// Override the regenerative braking efficiency, 0..1
    #[arg(long, value_name = "ETA")]
    pub regen_eff: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the step-by-step trace CSV here
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write an SVG plot here
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub vehicle: VehicleArgs,
    #[command(flatten)]
    pub cycle: CycleArgs,
    #[command(flatten)]
    pub regen: RegenArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Write an SVG of speed and state of charge here
    #[arg(long, value_name = "PATH")]
    pub soc_plot: Option<PathBuf>,
    /// Keep every Nth trace row
    #[arg(long, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub every: u64,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub vehicle: VehicleArgs,
    #[command(flatten)]
    pub cycle: CycleArgs,
    #[command(flatten)]
    pub regen: RegenArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Stop when state of charge falls to this value; defaults to the config's floor
    #[arg(long, value_name = "SOC")]
    pub until_soc: Option<f64>,
    /// Run with and without regeneration and report the range gain
    #[arg(long, conflicts_with_all = ["no_regen", "out", "plot"])]
    pub compare_regen: bool,
    /// Keep every Nth trace row
    #[arg(long, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub every: u64,
}

#[derive(Debug, Args)]
pub struct AccelArgs {
    #[command(flatten)]
    pub vehicle: VehicleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Target speed, km/h
    #[arg(long, value_name = "KMH", default_value_t = 100.0)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct TopSpeedArgs {
    #[command(flatten)]
    pub vehicle: VehicleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Length of the full-throttle run, s
    #[arg(long, value_name = "S", default_value_t = 120.0)]
    pub duration: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub vehicle: VehicleArgs,
    #[command(flatten)]
    pub cycle: CycleArgs,
    /// Override the regenerative braking efficiency, 0..1
    #[arg(long, value_name = "ETA")]
    pub regen_eff: Option<f64>,
    /// Stop when state of charge falls to this value; defaults to the config's floor
    #[arg(long, value_name = "SOC")]
    pub until_soc: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[command(flatten)]
    pub vehicle: VehicleArgs,
    /// Design cruising speed, km/h
    #[arg(long, value_name = "KMH", default_value_t = 120.0)]
    pub speed: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Vehicle config JSON to check
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Drive cycle CSV to check as well
    #[arg(long, value_name = "PATH")]
    pub cycle: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid config or cycle, bad flags.
    #[error("{0}")]
    Input(String),
    /// The simulation or output writing failed.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::UnreachableTarget { .. } => Self::Input(e.to_string()),
            ExperimentError::Sim(_) => Self::Runtime(e.to_string()),
        }
    }
}

impl From<evsim_core::SimError> for CliError {
    fn from(e: evsim_core::SimError) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn read_input(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} {}: {e}", path.display())))
}

fn load_config(args: &VehicleArgs) -> Result<VehicleConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => evsim_core::parse_config(&read_input(path, "config")?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => VehicleConfig::default(),
    };
    if let Some(dt) = args.dt {
        config.sim.dt = dt;
    }
    check_config(config, args.config.as_deref())
}

fn check_config(config: VehicleConfig, path: Option<&Path>) -> Result<VehicleConfig, CliError> {
    let name = path.map_or("config".into(), |p| p.display().to_string());
    config
        .validated()
        .map_err(|e| CliError::Input(format!("{name}: {e}")))
}

fn load_cycle(args: &CycleArgs) -> Result<DriveCycle, CliError> {
    match &args.cycle {
        Some(path) => {
            let name = path
                .file_stem()
                .map_or("cycle".into(), |s| s.to_string_lossy().into_owned());
            cycle::parse_cycle_named(&read_input(path, "cycle")?, &name)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
        None => Ok(DriveCycle::udds()),
    }
}

fn apply_regen(config: VehicleConfig, args: &RegenArgs) -> Result<(VehicleConfig, bool), CliError> {
    let config = with_regen_eff(config, args.regen_eff)?;
    Ok((config, !args.no_regen))
}

fn with_regen_eff(mut config: VehicleConfig, eff: Option<f64>) -> Result<VehicleConfig, CliError> {
    if let Some(eff) = eff {
        config.drivetrain.regen_efficiency = eff;
        config = check_config(config, None)?;
    }
    Ok(config)
}

fn soc_floor(config: &VehicleConfig, until: Option<f64>) -> Result<f64, CliError> {
    let floor = until.unwrap_or(config.battery.soc_floor);
    if !(0.0..config.battery.initial_soc).contains(&floor) {
        return Err(CliError::Input(format!(
            "--until-soc must lie in [0, initial_soc = {}), got {floor}",
            config.battery.initial_soc
        )));
    }
    Ok(floor)
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn emit_trace(trace: &[TraceRecord], path: &Path) -> Result<(), CliError> {
    write_output(path, &trace_csv::trace_to_csv(trace))
}

pub fn emit_plot(figure: Result<Figure, plot::EmptyPlot>, path: &Path) -> Result<(), CliError> {
    let svg = figure
        .and_then(|f| plot::render_svg(&f))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    write_output(path, &svg)
}

fn document(command: &str, body: Value) -> Value {
    let mut doc = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Value::Object(doc), Value::Object(body)) = (&mut doc, body) {
        doc.extend(body);
    }
    doc
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn simulate(args: &SimulateArgs) -> Result<Value, CliError> {
    let (config, regen_enabled) = apply_regen(load_config(&args.vehicle)?, &args.regen)?;
    let cycle = load_cycle(&args.cycle)?;
    let options = RunOptions {
        regen_enabled,
        ..Default::default()
    };
    let mut sink = Decimate::new(args.every as usize);
    let (summary, ledger) = engine::run_with_sink(&config, &cycle, &options, &mut sink)?;
    let trace = sink.records;
    if let Some(path) = &args.output.out {
        emit_trace(&trace, path)?;
    }
    if let Some(path) = &args.output.plot {
        emit_plot(plot::trace_figure(PlotKind::Tracking, &trace), path)?;
    }
    if let Some(path) = &args.soc_plot {
        emit_plot(plot::trace_figure(PlotKind::SocDynamics, &trace), path)?;
    }
    Ok(document(
        "simulate",
        json!({
            "cycle": cycle.name(),
            "regen_enabled": regen_enabled,
            "summary": to_value(&summary),
            "ledger": to_value(&ledger),
            "ledger_check": to_value(&ledger_check(&ledger)),
        }),
    ))
}

fn comparison_doc(cmp: &experiments::RegenComparison, cycle: &DriveCycle) -> Value {
    document(
        "compare-regen",
        json!({
            "cycle": cycle.name(),
            "comparison": to_value(cmp),
            "reference_gains_pct": REFERENCE_REGEN_GAINS_PCT,
        }),
    )
}

fn range(args: &RangeArgs) -> Result<Value, CliError> {
    let (config, regen_enabled) = apply_regen(load_config(&args.vehicle)?, &args.regen)?;
    let cycle = load_cycle(&args.cycle)?;
    let floor = soc_floor(&config, args.until_soc)?;
    if args.compare_regen {
        let cmp = experiments::regen_comparison(&config, &cycle, floor)?;
        return Ok(comparison_doc(&cmp, &cycle));
    }
    let wants_trace = args.output.out.is_some() || args.output.plot.is_some();
    let (report, ledger, trace) = if wants_trace {
        let mut sink = Decimate::new(args.every as usize);
        let (report, ledger) =
            experiments::range_run(&config, &cycle, regen_enabled, floor, &mut sink)?;
        (report, ledger, sink.records)
    } else {
        let (report, ledger) =
            experiments::range_run(&config, &cycle, regen_enabled, floor, Discard)?;
        (report, ledger, Vec::new())
    };
    if let Some(path) = &args.output.out {
        emit_trace(&trace, path)?;
    }
    if let Some(path) = &args.output.plot {
        emit_plot(plot::trace_figure(PlotKind::RangeSoc, &trace), path)?;
    }
    Ok(document(
        "range",
        json!({
            "cycle": cycle.name(),
            "report": to_value(&report),
            "ledger": to_value(&ledger),
            "ledger_check": to_value(&ledger_check(&ledger)),
        }),
    ))
}

fn compare_regen(args: &CompareArgs) -> Result<Value, CliError> {
    let config = with_regen_eff(load_config(&args.vehicle)?, args.regen_eff)?;
    let cycle = load_cycle(&args.cycle)?;
    let floor = soc_floor(&config, args.until_soc)?;
    let cmp = experiments::regen_comparison(&config, &cycle, floor)?;
    Ok(comparison_doc(&cmp, &cycle))
}

fn accel(args: &AccelArgs) -> Result<Value, CliError> {
    let config = load_config(&args.vehicle)?;
    if !args.target.is_finite() || args.target < 0.0 {
        return Err(CliError::Input(format!(
            "--target must be ≥ 0, got {}",
            args.target
        )));
    }
    let report = experiments::accel_test(&config, args.target)?;
    if let Some(path) = &args.output.out {
        let trace: Vec<_> = report
            .speed_trajectory
            .iter()
            .map(|&(t, v)| TraceRecord {
                t,
                v,
                v_target: args.target,
                ..Default::default()
            })
            .collect();
        emit_trace(&trace, path)?;
    }
    if let Some(path) = &args.output.plot {
        emit_plot(plot::accel_figure(&report), path)?;
    }
    Ok(document(
        "accel",
        json!({
            "time_to_target_s": report.time_to_target_s,
            "target_kmh": report.target_kmh,
            "reference_time_s": experiments::REFERENCE_ZERO_TO_100_S,
        }),
    ))
}

fn topspeed(args: &TopSpeedArgs) -> Result<Value, CliError> {
    let config = load_config(&args.vehicle)?;
    if !(args.duration.is_finite() && args.duration > 0.0) {
        return Err(CliError::Input(format!(
            "--duration must be > 0, got {}",
            args.duration
        )));
    }
    let (trace, _) = experiments::top_speed_trace(&config, args.duration)?;
    let report = experiments::top_speed_report(&config, &trace);
    if let Some(path) = &args.output.out {
        emit_trace(&trace, path)?;
    }
    if let Some(path) = &args.output.plot {
        emit_plot(plot::top_speed_figure(&report, &trace), path)?;
    }
    Ok(document(
        "topspeed",
        json!({
            "report": to_value(&report),
            "reference_top_speed_kmh": experiments::REFERENCE_TOP_SPEED_KMH,
        }),
    ))
}

fn size_motor(args: &SizeArgs) -> Result<Value, CliError> {
    let config = load_config(&args.vehicle)?;
    if !(args.speed.is_finite() && args.speed > 0.0) {
        return Err(CliError::Input(format!(
            "--speed must be > 0, got {}",
            args.speed
        )));
    }
    Ok(document(
        "size-motor",
        json!({
            "design_speed_kmh": args.speed,
            "power_kw": experiments::size_motor(&config, args.speed),
            "configured_max_power_kw": config.motor.max_power,
        }),
    ))
}

fn validate(args: &ValidateArgs) -> Result<Value, CliError> {
    let config = load_config(&VehicleArgs {
        config: Some(args.config.clone()),
        dt: None,
    })?;
    let mut body = json!({
        "valid": true,
        "derived": to_value(&config.derived()),
        "top_speed_oracle_kmh": experiments::top_speed_oracle(&config),
    });
    if let Some(path) = &args.cycle {
        let cycle = load_cycle(&CycleArgs {
            cycle: Some(path.clone()),
        })?;
        body["cycle"] = to_value(&cycle.stats());
    }
    Ok(document("validate", body))
}

/// Run a parsed command and return the JSON document for stdout.
pub fn execute(command: &Command) -> Result<String, CliError> {
    let doc = match command {
        Command::Simulate(a) => simulate(a)?,
        Command::Range(a) => range(a)?,
        Command::Accel(a) => accel(a)?,
        Command::Topspeed(a) => topspeed(a)?,
        Command::CompareRegen(a) => compare_regen(a)?,
        Command::SizeMotor(a) => size_motor(a)?,
        Command::Validate(a) => validate(a)?,
        Command::Defaults => return Ok(VehicleConfig::default().to_json()),
    };
    Ok(serde_json::to_string_pretty(&doc).expect("JSON values serialize"))
}

/// Parse `argv`, run, print, and return the process exit code.
pub fn main_with<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if writeln!(stdout, "{out}").is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            eprintln!("evsim: {e}");
            e.exit_code()
        }
    }
}
