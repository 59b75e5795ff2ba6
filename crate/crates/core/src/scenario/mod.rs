//! Scenario definitions: loading and validating `scenario.cfg` bundles, bundled
//! presets, simulation runs, telemetry replay and Venus mission runs.
//!
//! A scenario is one TOML file plus the CSV tables it references by relative
//! path. See `docs/scenario.md` for the schema.

mod presets;
mod replay;
mod schema;
mod venus;

pub use presets::{load_preset, preset_names};
pub use replay::{
    replay, ComparisonReport, ComparisonRow, ReplaySummary, Telemetry, TelemetryRow,
    COMPARISON_HEADER, MAX_CHANNEL_GAP_S,
};
pub use schema::{MassBudget, OutputsSection};
pub use venus::{venus_preset_run, Entry, GroundTrackRow, VenusRun, GROUND_TRACK_HEADER};

use crate::atmosphere::{
    builtin_profile, parse_atmosphere_csv, parse_radiation_csv, parse_winds_csv,
    serialize_profile, serialize_radiation, serialize_winds, AmbientGas, AtmosphereProfile,
    BuiltinProfile, RadiationEnvironment, WindTable,
};
use crate::constants::{EARTH_RADIUS, VENUS_RADIUS};
use crate::dynamics::{
    build_table, AerobotConfig, DynamicsError, Engine, Environment, SolarClock, TrajectoryRecord,
};
use crate::gastransfer::Timeline;
use crate::shape::{ShapeTable, MIN_AXIS_POINTS};
use schema::{
    AtmosphereSection, CommandsSection, LaunchSection, ScenarioFile, SolarSection, TableSection,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// Name of the scenario file inside a bundle directory.
pub const SCENARIO_FILE: &str = "scenario.cfg";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    /// Schema or validation failure at a dotted field path.
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("telemetry: {0}")]
    Telemetry(String),
    #[error("telemetry gaps longer than {limit} s: {gaps}")]
    Gaps { limit: f64, gaps: String },
}

fn field(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field { path: path.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planet {
    Earth,
    Venus,
}

impl Planet {
    pub fn name(self) -> &'static str {
        match self {
            Planet::Earth => "earth",
            Planet::Venus => "venus",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "earth" => Some(Planet::Earth),
            "venus" => Some(Planet::Venus),
            _ => None,
        }
    }

    pub fn radius(self) -> f64 {
        match self {
            Planet::Earth => EARTH_RADIUS,
            Planet::Venus => VENUS_RADIUS,
        }
    }

    pub fn ambient_gas(self) -> AmbientGas {
        match self {
            Planet::Earth => AmbientGas::Air,
            Planet::Venus => AmbientGas::Co2Mix,
        }
    }
}

/// Where the thermodynamic table comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum AtmosphereSource {
    Builtin(BuiltinProfile),
    File(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Launch {
    pub altitude_m: f64,
    pub lat_deg: f64,
    pub lon_deg: f64,
    /// Local solar time at the launch point, when a solar clock is configured.
    pub local_solar_time_h: Option<f64>,
}

/// A fully resolved, validated run definition. Immutable once loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub planet: Planet,
    pub t_end_s: f64,
    pub dt_s: f64,
    pub record_interval_s: f64,
    pub atmosphere: AtmosphereSource,
    /// Thermodynamic table with winds attached.
    pub profile: AtmosphereProfile,
    pub winds_file: Option<String>,
    pub radiation: RadiationEnvironment,
    pub radiation_file: Option<String>,
    pub ground_alt_m: Option<f64>,
    pub launch: Launch,
    /// Solar day length; `None` disables solar geometry.
    pub solar_day_s: Option<f64>,
    pub timeline: Timeline,
    pub commands_file: Option<String>,
    /// (ρ_diff points, fill-fraction points).
    pub table_grid: (usize, usize),
    pub outputs: OutputsSection,
    pub mass_budget: Option<MassBudget>,
    pub config: AerobotConfig,
}

/// Reads the files a scenario refers to.
pub(crate) trait FileSource {
    fn read(&self, rel: &str) -> Result<String, String>;
}

struct DirSource(PathBuf);

impl FileSource for DirSource {
    fn read(&self, rel: &str) -> Result<String, String> {
        let p = self.0.join(rel);
        std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))
    }
}

/// Loads `path`, which is either a scenario file, a bundle directory containing
/// `scenario.cfg`, or `preset:<name>`.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("preset:")) {
        return load_preset(name);
    }
    let file = if path.is_dir() { path.join(SCENARIO_FILE) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(|e| ScenarioError::Io {
        path: file.display().to_string(),
        message: e.to_string(),
    })?;
    let base = file.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text, &DirSource(base))
}

pub(crate) fn parse_scenario(text: &str, files: &dyn FileSource) -> Result<Scenario, ScenarioError> {
    let de = toml::Deserializer::new(text);
    let raw: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().message().to_string();
        field(if path == "." { "scenario" } else { &path }, inner)
    })?;
    resolve(raw, files)
}

fn read_ref(files: &dyn FileSource, path: &str, rel: &str) -> Result<String, ScenarioError> {
    files.read(rel).map_err(|e| field(path, format!("file not found or unreadable: {e}")))
}

fn positive(path: &str, v: f64) -> Result<(), ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(path, format!("must be positive, got {v}")))
    }
}

fn resolve(raw: ScenarioFile, files: &dyn FileSource) -> Result<Scenario, ScenarioError> {
    let planet = Planet::from_name(&raw.planet)
        .ok_or_else(|| field("planet", format!("unknown planet '{}' (earth or venus)", raw.planet)))?;
    if !(raw.t_end_s >= 0.0 && raw.t_end_s.is_finite()) {
        return Err(field("t_end_s", format!("must be non-negative, got {}", raw.t_end_s)));
    }
    if !(raw.dt_s > 0.0 && raw.dt_s <= 5.0) {
        return Err(field("dt_s", format!("must lie in (0, 5] s, got {}", raw.dt_s)));
    }
    positive("record_interval_s", raw.record_interval_s)?;

    let a = &raw.atmosphere;
    let (source, profile) = match (&a.builtin, &a.file) {
        (Some(b), None) => {
            let which = BuiltinProfile::from_name(b).ok_or_else(|| {
                field("atmosphere.builtin", format!("unknown profile '{b}' (us-standard-offset20 or vira-clouds)"))
            })?;
            (AtmosphereSource::Builtin(which), builtin_profile(which))
        }
        (None, Some(f)) => {
            let text = read_ref(files, "atmosphere.file", f)?;
            let p = parse_atmosphere_csv(&text).map_err(|e| field("atmosphere.file", format!("{f}: {e}")))?;
            (AtmosphereSource::File(f.clone()), p)
        }
        _ => return Err(field("atmosphere", "exactly one of 'builtin' or 'file' is required")),
    };
    if profile.gas != planet.ambient_gas() {
        return Err(field(
            "atmosphere",
            format!("ambient gas '{}' does not match planet '{}'", profile.gas.name(), planet.name()),
        ));
    }
    let winds = match &a.winds {
        Some(f) => {
            let text = read_ref(files, "atmosphere.winds", f)?;
            parse_winds_csv(&text).map_err(|e| field("atmosphere.winds", format!("{f}: {e}")))?
        }
        None => WindTable::calm(),
    };
    let profile = profile.with_winds(winds);
    let radiation = match &a.radiation {
        Some(f) => {
            let text = read_ref(files, "atmosphere.radiation", f)?;
            parse_radiation_csv(&text).map_err(|e| field("atmosphere.radiation", format!("{f}: {e}")))?
        }
        None => RadiationEnvironment::dark(),
    };
    if radiation.needs_zenith() && raw.solar.is_none() {
        return Err(field("solar", "zenith-keyed radiation channels need a [solar] section"));
    }
    let (lo, hi) = profile.altitude_band();
    if let Some(g) = a.ground_alt_m {
        if !(g >= lo && g <= hi) {
            return Err(field("atmosphere.ground_alt_m", format!("{g} m lies outside the atmosphere band [{lo}, {hi}] m")));
        }
    }

    let l = raw.launch;
    if !(l.altitude_m >= lo && l.altitude_m <= hi) {
        return Err(field("launch.altitude_m", format!("{} m lies outside the atmosphere band [{lo}, {hi}] m", l.altitude_m)));
    }
    if let Some(g) = a.ground_alt_m {
        if l.altitude_m < g {
            return Err(field("launch.altitude_m", format!("{} m is below the ground at {g} m", l.altitude_m)));
        }
    }
    if !(l.lat_deg.abs() < 90.0) {
        return Err(field("launch.lat_deg", format!("must lie in (-90, 90), got {}", l.lat_deg)));
    }
    if !l.lon_deg.is_finite() {
        return Err(field("launch.lon_deg", "must be finite"));
    }
    match (raw.solar, l.local_solar_time_h) {
        (Some(s), Some(h)) => {
            positive("solar.day_s", s.day_s)?;
            if !(0.0..24.0).contains(&h) {
                return Err(field("launch.local_solar_time_h", format!("must lie in [0, 24), got {h}")));
            }
        }
        (Some(_), None) => return Err(field("launch.local_solar_time_h", "required when [solar] is present")),
        (None, Some(_)) => return Err(field("solar", "launch.local_solar_time_h needs a [solar] section")),
        (None, None) => {}
    }

    let timeline = match &raw.commands {
        Some(c) => {
            let text = read_ref(files, "commands.file", &c.file)?;
            Timeline::parse_csv(&text).map_err(|e| field("commands.file", format!("{}: {e}", c.file)))?
        }
        None => Timeline::default(),
    };

    let t = raw.table;
    if t.n_rho < MIN_AXIS_POINTS {
        return Err(field("table.n_rho", format!("at least {MIN_AXIS_POINTS} points required, got {}", t.n_rho)));
    }
    if t.n_fill < MIN_AXIS_POINTS {
        return Err(field("table.n_fill", format!("at least {MIN_AXIS_POINTS} points required, got {}", t.n_fill)));
    }

    raw.aerobot.validate().map_err(|e| field("aerobot", e.to_string()))?;
    if let Some(m) = raw.mass_budget {
        let films = raw.aerobot.envelope.zp_film_mass_kg + raw.aerobot.envelope.sp_film_mass_kg;
        if (m.balloon_system_kg - films).abs() > 1e-9 {
            return Err(field(
                "mass_budget.balloon_system_kg",
                format!("{} kg differs from the envelope film total {films} kg", m.balloon_system_kg),
            ));
        }
        if (m.bcm_kg + m.gondola_kg - raw.aerobot.payload_kg).abs() > 1e-9 {
            return Err(field(
                "mass_budget",
                format!("BCM + gondola = {} kg differs from aerobot.payload_kg", m.bcm_kg + m.gondola_kg),
            ));
        }
    }

    Ok(Scenario {
        name: raw.name,
        planet,
        t_end_s: raw.t_end_s,
        dt_s: raw.dt_s,
        record_interval_s: raw.record_interval_s,
        atmosphere: source,
        profile,
        winds_file: raw.atmosphere.winds,
        radiation,
        radiation_file: raw.atmosphere.radiation,
        ground_alt_m: raw.atmosphere.ground_alt_m,
        launch: Launch {
            altitude_m: l.altitude_m,
            lat_deg: l.lat_deg,
            lon_deg: l.lon_deg,
            local_solar_time_h: l.local_solar_time_h,
        },
        solar_day_s: raw.solar.map(|s| s.day_s),
        timeline,
        commands_file: raw.commands.map(|c| c.file),
        table_grid: (t.n_rho, t.n_fill),
        outputs: raw.outputs,
        mass_budget: raw.mass_budget,
        config: raw.aerobot,
    })
}

impl Scenario {
    /// The scenario with every table that carries data given a file name, so that
    /// it can be written as a self-contained bundle.
    pub fn normalized(&self) -> Scenario {
        let mut s = self.clone();
        if s.winds_file.is_none() && s.profile.winds != WindTable::calm() {
            s.winds_file = Some("winds.csv".into());
        }
        if s.radiation_file.is_none() && s.radiation != RadiationEnvironment::dark() {
            s.radiation_file = Some("radiation.csv".into());
        }
        if s.commands_file.is_none() && !s.timeline.is_empty() {
            s.commands_file = Some("commands.csv".into());
        }
        s
    }

    fn to_file(&self) -> ScenarioFile {
        let (builtin, file) = match &self.atmosphere {
            AtmosphereSource::Builtin(b) => (Some(b.name().to_string()), None),
            AtmosphereSource::File(f) => (None, Some(f.clone())),
        };
        ScenarioFile {
            name: self.name.clone(),
            planet: self.planet.name().to_string(),
            t_end_s: self.t_end_s,
            dt_s: self.dt_s,
            record_interval_s: self.record_interval_s,
            atmosphere: AtmosphereSection {
                builtin,
                file,
                winds: self.winds_file.clone(),
                radiation: self.radiation_file.clone(),
                ground_alt_m: self.ground_alt_m,
            },
            launch: LaunchSection {
                altitude_m: self.launch.altitude_m,
                lat_deg: self.launch.lat_deg,
                lon_deg: self.launch.lon_deg,
                local_solar_time_h: self.launch.local_solar_time_h,
            },
            solar: self.solar_day_s.map(|day_s| SolarSection { day_s }),
            commands: self.commands_file.clone().map(|file| CommandsSection { file }),
            table: TableSection { n_rho: self.table_grid.0, n_fill: self.table_grid.1 },
            outputs: self.outputs,
            mass_budget: self.mass_budget,
            aerobot: self.config,
        }
    }

    /// The scenario file text with every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario fields are TOML-representable")
    }

    /// Writes `scenario.cfg` and every referenced table into `dir`.
    pub fn write_bundle(&self, dir: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let dir = dir.as_ref();
        let s = self.normalized();
        let io = |p: &Path, e: std::io::Error| ScenarioError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut out: Vec<(String, String)> = vec![(SCENARIO_FILE.into(), s.to_toml())];
        if let AtmosphereSource::File(f) = &s.atmosphere {
            out.push((f.clone(), serialize_profile(&s.profile)));
        }
        if let Some(f) = &s.winds_file {
            out.push((f.clone(), serialize_winds(&s.profile.winds)));
        }
        if let Some(f) = &s.radiation_file {
            out.push((f.clone(), serialize_radiation(&s.radiation)));
        }
        if let Some(f) = &s.commands_file {
            out.push((f.clone(), s.timeline.to_csv()));
        }
        for (name, text) in out {
            let p = dir.join(name);
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
            }
            std::fs::write(&p, text).map_err(|e| io(&p, e))?;
        }
        Ok(())
    }

    pub fn solar_clock(&self) -> Option<SolarClock> {
        let day = self.solar_day_s?;
        let lst = self.launch.local_solar_time_h.unwrap_or(12.0);
        Some(SolarClock::from_local_time(self.launch.lon_deg.to_radians(), lst, day))
    }

    pub fn environment(&self) -> Environment {
        Environment {
            atmosphere: self.profile.clone(),
            radiation: self.radiation.clone(),
            planet_radius: self.planet.radius(),
            solar: self.solar_clock(),
            ground_alt: self.ground_alt_m,
        }
    }

    /// Shape table over the density range this scenario can meet.
    pub fn build_table(&self) -> Result<ShapeTable, ScenarioError> {
        Ok(build_table(&self.config, &self.environment(), Some(self.table_grid))?)
    }

    /// A fresh engine at the launch point, driven by the scenario timeline.
    pub fn engine(&self, table: Arc<ShapeTable>) -> Result<Engine, ScenarioError> {
        self.engine_with(Arc::new(self.environment()), table, &self.timeline)
    }

    pub(crate) fn engine_with(
        &self,
        env: Arc<Environment>,
        table: Arc<ShapeTable>,
        timeline: &Timeline,
    ) -> Result<Engine, ScenarioError> {
        let l = &self.launch;
        Ok(Engine::new(
            self.config,
            env,
            table,
            timeline,
            self.dt_s,
            [l.altitude_m, l.lat_deg.to_radians(), l.lon_deg.to_radians()],
        )?)
    }

    /// Runs to `t_end_s`. Engine faults end the run early and are reported in the
    /// record rather than as an error.
    pub fn simulate(&self, table: Option<Arc<ShapeTable>>) -> Result<TrajectoryRecord, ScenarioError> {
        let table = match table {
            Some(t) => t,
            None => Arc::new(self.build_table()?),
        };
        let mut engine = self.engine(table)?;
        Ok(engine.run(self.t_end_s, self.record_interval_s))
    }
}

/// Mean altitude over the final tenth of a record, as a float-altitude estimate.
pub fn float_altitude(record: &TrajectoryRecord) -> Option<f64> {
    let last = record.last()?;
    let from = last.t * 0.9;
    let tail: Vec<f64> = record.rows.iter().filter(|r| r.t >= from).map(|r| r.alt).collect();
    Some(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Human-readable run summary.
pub fn run_summary(s: &Scenario, record: &TrajectoryRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", s.name);
    let _ = writeln!(out, "planet: {}", s.planet.name());
    let _ = writeln!(out, "dt_s: {}", s.dt_s);
    let _ = writeln!(out, "t_end_s: {}", s.t_end_s);
    let _ = writeln!(out, "rows: {}", record.rows.len());
    if let (Some(first), Some(last)) = (record.rows.first(), record.last()) {
        let max_alt = record.rows.iter().map(|r| r.alt).fold(f64::MIN, f64::max);
        let he0 = first.m_sp + first.m_zp;
        let he1 = last.m_sp + last.m_zp;
        let _ = writeln!(out, "t_final_s: {}", last.t);
        let _ = writeln!(out, "final_altitude_m: {:.3}", last.alt);
        let _ = writeln!(out, "max_altitude_m: {:.3}", max_alt);
        if let Some(f) = float_altitude(record) {
            let _ = writeln!(out, "float_altitude_m: {:.3}", f);
        }
        let _ = writeln!(out, "helium_start_kg: {:.6}", he0);
        let _ = writeln!(out, "helium_end_kg: {:.6}", he1);
        let _ = writeln!(out, "final_mode: {}", last.mode);
    }
    let _ = writeln!(
        out,
        "fault: {}",
        record.fault.as_deref().unwrap_or("none")
    );
    out
}
