//! Subcommands and their exit codes.

use crate::session::{Pacing, Server};
use aerobot_core::dynamics::DynamicsError;
use aerobot_core::scenario::{
    self, load_scenario, replay, venus_preset_run, Entry, GroundTrackRow, ScenarioError, Telemetry, VenusRun,
};
use aerobot_core::shape::ShapeError;
use aerobot_core::{Scenario, ShapeTable, TrajectoryRecord};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad arguments, unreadable or invalid scenario or telemetry.
    pub const CONFIG: i32 = 1;
    /// The shape table has cells with no equilibrium solution.
    pub const INFEASIBLE: i32 = 2;
    /// The engine stopped on a physical fault; products up to the fault are written.
    pub const FAULT: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "aerobot", version, about = "Balloon-in-balloon aerobot flight simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Precompute the envelope shape table for a scenario's aerobot.
    Shapetable {
        /// Scenario file, bundle directory or preset:NAME.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
        /// Grid as RHOxFILL points, at least 4 per axis (default from the scenario, 16x32).
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
    },
    /// Run a scenario and write its trajectory and summary.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay recorded telemetry against a scenario.
    Replay {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        telemetry: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multi-day Venus run from a built-in preset.
    Venus {
        #[arg(long, default_value = "b2")]
        preset: String,
        #[arg(long, default_value_t = 25.0)]
        days: f64,
        #[arg(long)]
        out: PathBuf,
        /// Entry latitude [deg]; defaults to the preset's.
        #[arg(long)]
        lat: Option<f64>,
        /// Entry local solar time [h]; defaults to the preset's.
        #[arg(long)]
        lst: Option<f64>,
    },
    /// Serve live piloting sessions over WebSocket.
    Serve {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 8765)]
        port: u16,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Simulated seconds between state frames.
        #[arg(long, default_value_t = 1.0)]
        frame_interval: f64,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid '{s}' must look like 16x32"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("grid '{s}' must look like 16x32"));
    let (r, c) = (parse(a)?, parse(b)?);
    let min = aerobot_core::shape::MIN_AXIS_POINTS;
    if r < min || c < min {
        return Err(format!("grid '{s}' is too coarse: minimum {min} points per axis"));
    }
    Ok((r, c))
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("engine fault: {0}")]
    Fault(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Infeasible(_) => exit::INFEASIBLE,
            CliError::Fault(_) => exit::FAULT,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Dynamics(DynamicsError::Fault { .. }) => CliError::Fault(e.to_string()),
            ScenarioError::Dynamics(DynamicsError::Shape(ShapeError::TableInfeasible { .. })) => {
                CliError::Infeasible(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("aerobot: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Shapetable { spec, out, grid } => cmd_shapetable(&spec, &out, grid),
        Command::Simulate { scenario, out } => cmd_simulate(&scenario, &out),
        Command::Replay { scenario, telemetry, out } => cmd_replay(&scenario, &telemetry, &out),
        Command::Venus { preset, days, out, lat, lst } => cmd_venus(&preset, days, &out, lat, lst),
        Command::Serve { scenario, port, speed, host, frame_interval } => {
            cmd_serve(&scenario, &host, port, speed, frame_interval)
        }
    }
}

fn cmd_shapetable(spec: &str, out: &Path, grid: Option<(usize, usize)>) -> Result<(), CliError> {
    let mut s = load_scenario(spec)?;
    if let Some(g) = grid {
        s.table_grid = g;
    }
    let table = aerobot_core::dynamics::build_table(&s.config, &s.environment(), Some(s.table_grid))
        .map_err(ScenarioError::from)?;
    write(out, &table.to_csv())?;
    let bad = table.infeasible_cells();
    if !bad.is_empty() {
        return Err(CliError::Infeasible(format!(
            "{} of {} shape-table cells have no solution (written as 'infeasible')",
            bad.len(),
            table.grid.rho_diff.len() * table.grid.fill.len()
        )));
    }
    Ok(())
}

fn ground_track(s: &Scenario, record: &TrajectoryRecord) -> String {
    let clock = s.solar_clock();
    let mut out = String::from(scenario::GROUND_TRACK_HEADER);
    out.push('\n');
    for r in &record.rows {
        let lon = (r.lon.to_degrees() + 180.0).rem_euclid(360.0) - 180.0;
        let _ = write!(out, "{},{},{},{}", r.t, r.lat.to_degrees(), lon, r.alt);
        match &clock {
            Some(c) => {
                let day = c.zenith(r.lat, r.lon, r.t) < FRAC_PI_2;
                let _ = writeln!(out, ",{},{}", c.local_solar_time(r.lon, r.t), day as u8);
            }
            None => out.push_str(",,\n"),
        }
    }
    out
}

fn fault_check(record: &TrajectoryRecord) -> Result<(), CliError> {
    match &record.fault {
        Some(reason) => Err(CliError::Fault(reason.clone())),
        None => Ok(()),
    }
}

fn cmd_simulate(path: &str, out: &Path) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    out_dir(out)?;
    let record = s.simulate(None)?;
    s.write_bundle(out.join("scenario"))?;
    if s.outputs.trajectory {
        write(&out.join("trajectory.csv"), &record.to_csv())?;
    }
    if s.outputs.ground_track {
        write(&out.join("ground_track.csv"), &ground_track(&s, &record))?;
    }
    let summary = scenario::run_summary(&s, &record);
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    fault_check(&record)
}

fn cmd_replay(path: &str, telemetry: &Path, out: &Path) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    let text = std::fs::read_to_string(telemetry)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", telemetry.display())))?;
    let tele = Telemetry::parse_csv(&text)?;
    out_dir(out)?;
    let report = replay(&s, &tele, None)?;
    write(&out.join("comparison.csv"), &report.to_csv())?;
    let summary = format!("scenario: {}\ntelemetry: {}\n{}", s.name, telemetry.display(), report.summary_text());
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn venus_summary(s: &Scenario, run: &VenusRun, days: f64, entry: Entry) -> String {
    let mut out = scenario::run_summary(s, &run.record);
    let _ = writeln!(out, "days: {days}");
    let _ = writeln!(out, "entry_lat_deg: {}", entry.lat_deg);
    let _ = writeln!(out, "entry_local_solar_time_h: {}", entry.local_solar_time_h);
    if let (Some(a), Some(b)) = (run.track.first(), run.track.last()) {
        let d_lon = (b.lon_deg - a.lon_deg).to_radians();
        let _ = writeln!(out, "circumnavigations: {:.3}", d_lon.abs() / TAU);
        let _ = writeln!(out, "final_lat_deg: {:.4}", b.lat_deg);
        let alts = run.track.iter().map(|r: &GroundTrackRow| r.alt);
        let (lo, hi) = alts.fold((f64::MAX, f64::MIN), |(lo, hi), a| (lo.min(a), hi.max(a)));
        let _ = writeln!(out, "altitude_range_m: {lo:.1} {hi:.1}");
    }
    out
}

fn cmd_venus(preset: &str, days: f64, out: &Path, lat: Option<f64>, lst: Option<f64>) -> Result<(), CliError> {
    let name = if preset.starts_with("venus-") { preset.to_string() } else { format!("venus-{preset}") };
    let s = scenario::load_preset(&name)?;
    let entry = Entry {
        lat_deg: lat.unwrap_or(s.launch.lat_deg),
        local_solar_time_h: lst.or(s.launch.local_solar_time_h).unwrap_or(12.0),
    };
    out_dir(out)?;
    let run = venus_preset_run(&s, entry, days, None)?;
    write(&out.join("trajectory.csv"), &run.record.to_csv())?;
    write(&out.join("ground_track.csv"), &run.track_csv())?;
    let summary = venus_summary(&s, &run, days, entry);
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    fault_check(&run.record)
}

fn cmd_serve(path: &str, host: &str, port: u16, speed: f64, frame_interval: f64) -> Result<(), CliError> {
    if !(speed > 0.0) {
        return Err(CliError::Config(format!("--speed must be positive, got {speed}")));
    }
    if !(frame_interval > 0.0) {
        return Err(CliError::Config(format!("--frame-interval must be positive, got {frame_interval}")));
    }
    let s = load_scenario(path)?;
    // Bind before the slow table build so a busy port fails fast.
    let listener = std::net::TcpListener::bind((host, port))
        .map_err(|e| CliError::Config(format!("cannot listen on {host}:{port}: {e}")))?;
    let table: Arc<ShapeTable> = Arc::new(s.build_table()?);
    let server = Server::new(listener, s, table, Pacing { speed, frame_interval });
    let local = server.local_addr().map_err(|e| CliError::Config(e.to_string()))?;
    println!("listening on ws://{local}");
    server.run()?;
    Ok(())
}
