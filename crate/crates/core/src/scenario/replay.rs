//! Telemetry replay: drive the engine with a recorded command log and measured
//! environment, then compare simulated and measured channels.

use super::{Scenario, ScenarioError};
use crate::atmosphere::{RadChannel, RadParam, WindParam, WindRow, WindTable};
use crate::dynamics::{Environment, TrajectoryRow};
use crate::gastransfer::{Timeline, TransferAction, TransferCommand};
use crate::shape::ShapeTable;
use std::fmt::Write as _;
use std::sync::Arc;

/// Longest tolerated spacing between samples of one channel [s].
pub const MAX_CHANNEL_GAP_S: f64 = 60.0;

pub const COMPARISON_HEADER: &str = "t_s,d_alt_m,d_p_sp_pa,d_t1_k,d_t2_k,d_t3_k,d_t4_k";

const COMPARED: [&str; 6] = ["alt_m", "p_sp_pa", "t1_k", "t2_k", "t3_k", "t4_k"];
const WIND: [&str; 3] = ["wind_east_ms", "wind_north_ms", "wind_up_ms"];
const IRRADIANCE: [RadChannel; 5] = [
    RadChannel::UpSolar,
    RadChannel::SideSolar,
    RadChannel::DownSolar,
    RadChannel::UpIr,
    RadChannel::DownIr,
];

/// One telemetry sample. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    /// alt, p_sp, t1..t4 in [`COMPARISON_HEADER`] order.
    pub compared: [Option<f64>; 6],
    pub wind: [Option<f64>; 3],
    /// Irradiances keyed like the radiation tables (`up_solar`, ..., `down_ir`).
    pub irradiance: [Option<f64>; 5],
    pub event: String,
}

/// Measured flight record. Columns follow `trajectory.csv`; optional measured
/// channels are `wind_east_ms`, `wind_north_ms`, `wind_up_ms` and the five
/// irradiance keys. Only `t_s` and `alt_m` are mandatory.
#[derive(Debug, Clone, PartialEq)]
pub struct Telemetry {
    pub rows: Vec<TelemetryRow>,
    pub has_event_column: bool,
    has_wind: bool,
    has_irradiance: [bool; 5],
}

impl Telemetry {
    pub fn parse_csv(text: &str) -> Result<Self, ScenarioError> {
        let bad = |m: String| ScenarioError::Telemetry(m);
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let col = |name: &str| header.iter().position(|h| h == name);
        let t_col = col("t_s").ok_or_else(|| bad("missing column t_s".into()))?;
        if col("alt_m").is_none() {
            return Err(bad("missing column alt_m".into()));
        }
        let compared_cols = COMPARED.map(col);
        let wind_cols = WIND.map(col);
        let irr_cols = IRRADIANCE.map(|c| col(c.key()));
        let event_col = col("event");

        let mut rows: Vec<TelemetryRow> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let cell = |i: Option<usize>, name: &str| -> Result<Option<f64>, ScenarioError> {
                match i.and_then(|i| rec.get(i)) {
                    None | Some("") => Ok(None),
                    Some(s) => s
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| bad(format!("row {line}: column {name}: '{s}' is not a number"))),
                }
            };
            let t = cell(Some(t_col), "t_s")?.ok_or_else(|| bad(format!("row {line}: empty t_s")))?;
            if let Some(prev) = rows.last() {
                if !(t > prev.t) {
                    return Err(bad(format!("row {line}: timestamps must be strictly increasing")));
                }
            } else if t < 0.0 {
                return Err(bad(format!("row {line}: negative time")));
            }
            let mut compared = [None; 6];
            for (k, c) in compared_cols.iter().enumerate() {
                compared[k] = cell(*c, COMPARED[k])?;
            }
            let mut wind = [None; 3];
            for (k, c) in wind_cols.iter().enumerate() {
                wind[k] = cell(*c, WIND[k])?;
            }
            let mut irradiance = [None; 5];
            for (k, c) in irr_cols.iter().enumerate() {
                irradiance[k] = cell(*c, IRRADIANCE[k].key())?;
            }
            let event = event_col.and_then(|i| rec.get(i)).unwrap_or("").to_string();
            rows.push(TelemetryRow { t, compared, wind, irradiance, event });
        }
        if rows.is_empty() {
            return Err(bad("no data rows".into()));
        }
        Ok(Self {
            has_event_column: event_col.is_some(),
            has_wind: wind_cols[0].is_some() || wind_cols[1].is_some(),
            has_irradiance: irr_cols.map(|c| c.is_some()),
            rows,
        })
    }

    /// Telemetry that mirrors an engine trajectory exactly.
    pub fn from_trajectory(rows: &[TrajectoryRow]) -> Self {
        let rows = rows
            .iter()
            .map(|r| TelemetryRow {
                t: r.t,
                compared: [
                    Some(r.alt),
                    Some(r.p_sp),
                    Some(r.t_nodes[0]),
                    Some(r.t_nodes[1]),
                    Some(r.t_nodes[2]),
                    Some(r.t_nodes[3]),
                ],
                wind: [None; 3],
                irradiance: [None; 5],
                event: r.event.clone(),
            })
            .collect();
        Self { rows, has_event_column: true, has_wind: false, has_irradiance: [false; 5] }
    }

    pub fn t_end(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// Gaps longer than [`MAX_CHANNEL_GAP_S`] in every channel that is present,
    /// counted from t = 0 to the last sample.
    pub fn gaps(&self) -> Vec<(String, f64, f64)> {
        let mut channels: Vec<(String, Vec<f64>)> = Vec::new();
        let mut push = |name: &str, times: Vec<f64>| channels.push((name.to_string(), times));
        for (k, name) in COMPARED.iter().enumerate() {
            let times: Vec<f64> = self.rows.iter().filter(|r| r.compared[k].is_some()).map(|r| r.t).collect();
            if !times.is_empty() || k == 0 {
                push(name, times);
            }
        }
        if self.has_wind {
            for (k, name) in WIND.iter().enumerate().take(2) {
                push(name, self.rows.iter().filter(|r| r.wind[k].is_some()).map(|r| r.t).collect());
            }
        }
        for (k, c) in IRRADIANCE.iter().enumerate() {
            if self.has_irradiance[k] {
                push(c.key(), self.rows.iter().filter(|r| r.irradiance[k].is_some()).map(|r| r.t).collect());
            }
        }
        let end = self.t_end();
        let mut out = Vec::new();
        for (name, times) in channels {
            let mut prev = 0.0;
            for &t in times.iter().chain(std::iter::once(&end)) {
                if t - prev > MAX_CHANNEL_GAP_S {
                    out.push((name.clone(), prev, t));
                }
                prev = prev.max(t);
            }
        }
        out
    }

    /// Pump/vent/poppet commands found in the event column. A command logged on
    /// the row ending at t was applied at the step boundary t − dt.
    pub fn command_log(&self, dt: f64) -> Result<Timeline, ScenarioError> {
        let mut cmds = Vec::new();
        for r in &self.rows {
            for tok in r.event.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                if let Some(action) = TransferAction::parse(tok) {
                    cmds.push(TransferCommand { t: (r.t - dt).max(0.0), action });
                }
            }
        }
        Timeline::new(cmds).map_err(|e| ScenarioError::Telemetry(e.to_string()))
    }

    fn environment(&self, base: &Environment) -> Result<Environment, ScenarioError> {
        let mut env = base.clone();
        if self.has_wind {
            let rows: Vec<WindRow> = self
                .rows
                .iter()
                .filter(|r| r.wind[0].is_some() || r.wind[1].is_some())
                .map(|r| WindRow {
                    key: r.t,
                    east: r.wind[0].unwrap_or(0.0),
                    north: r.wind[1].unwrap_or(0.0),
                    up: r.wind[2].unwrap_or(0.0),
                })
                .collect();
            let w = WindTable::new(WindParam::Time, rows).map_err(|e| ScenarioError::Telemetry(e.to_string()))?;
            env.atmosphere = env.atmosphere.with_winds(w);
        }
        for (k, c) in IRRADIANCE.iter().enumerate() {
            if !self.has_irradiance[k] {
                continue;
            }
            let pts: Vec<(f64, f64)> =
                self.rows.iter().filter_map(|r| r.irradiance[k].map(|v| (r.t, v))).collect();
            env.radiation
                .set_channel(*c, RadParam::Time, pts)
                .map_err(|e| ScenarioError::Telemetry(format!("{}: {e}", c.key())))?;
        }
        Ok(env)
    }
}

/// Simulated minus measured, per telemetry sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub d: [Option<f64>; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub samples: usize,
    pub max_abs_alt_m: f64,
    /// |ΔP_SP| at the last sample carrying a P_SP measurement.
    pub accumulated_p_sp_pa: f64,
    pub p_sp_rms_pa: f64,
    /// RMS over all four node-temperature channels.
    pub temp_rms_k: f64,
    /// Share of commanded intervals whose simulated altitude response has the
    /// measured sign; `None` without pump or vent commands.
    pub sign_agreement: Option<f64>,
    pub intervals: usize,
}

impl ReplaySummary {
    pub fn is_zero(&self) -> bool {
        self.max_abs_alt_m == 0.0 && self.accumulated_p_sp_pa == 0.0 && self.p_sp_rms_pa == 0.0 && self.temp_rms_k == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub summary: ReplaySummary,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(COMPARISON_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{}", r.t);
            for d in r.d {
                match d {
                    Some(v) => {
                        let _ = write!(s, ",{v}");
                    }
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let m = &self.summary;
        let mut s = String::new();
        let _ = writeln!(s, "samples: {}", m.samples);
        let _ = writeln!(s, "max_abs_alt_error_m: {}", m.max_abs_alt_m);
        let _ = writeln!(s, "accumulated_p_sp_error_pa: {}", m.accumulated_p_sp_pa);
        let _ = writeln!(s, "p_sp_rms_error_pa: {}", m.p_sp_rms_pa);
        let _ = writeln!(s, "temperature_rms_error_k: {}", m.temp_rms_k);
        match m.sign_agreement {
            Some(a) => {
                let _ = writeln!(s, "sign_agreement: {a} ({} intervals)", m.intervals);
            }
            None => s.push_str("sign_agreement: n/a\n"),
        }
        s
    }
}

fn lerp_row(a: &TrajectoryRow, b: &TrajectoryRow, t: f64) -> [f64; 6] {
    let va = [a.alt, a.p_sp, a.t_nodes[0], a.t_nodes[1], a.t_nodes[2], a.t_nodes[3]];
    let vb = [b.alt, b.p_sp, b.t_nodes[0], b.t_nodes[1], b.t_nodes[2], b.t_nodes[3]];
    if t == b.t {
        return vb;
    }
    let w = (t - a.t) / (b.t - a.t);
    std::array::from_fn(|k| va[k] + w * (vb[k] - va[k]))
}

/// Replays `telemetry` against `scenario`. Commands come from the telemetry
/// event column when present, otherwise from the scenario timeline.
pub fn replay(
    scenario: &Scenario,
    telemetry: &Telemetry,
    table: Option<Arc<ShapeTable>>,
) -> Result<ComparisonReport, ScenarioError> {
    let gaps = telemetry.gaps();
    if !gaps.is_empty() {
        let list: Vec<String> = gaps.iter().map(|(c, a, b)| format!("{c} [{a}, {b}]")).collect();
        return Err(ScenarioError::Gaps { limit: MAX_CHANNEL_GAP_S, gaps: list.join(", ") });
    }
    let timeline = if telemetry.has_event_column {
        telemetry.command_log(scenario.dt_s)?
    } else {
        scenario.timeline.clone()
    };
    let env = Arc::new(telemetry.environment(&scenario.environment())?);
    let table = match table {
        Some(t) => t,
        None => Arc::new(scenario.build_table()?),
    };
    let mut engine = scenario.engine_with(env, table, &timeline)?;

    let mut sim: Vec<[f64; 6]> = Vec::with_capacity(telemetry.rows.len());
    let mut prev = engine.row();
    for r in &telemetry.rows {
        while engine.state().t < r.t {
            prev = engine.row();
            engine.step()?;
        }
        let cur = engine.row();
        let a = if cur.t == r.t || prev.t >= cur.t { &cur } else { &prev };
        sim.push(lerp_row(a, &cur, r.t));
    }

    let mut rows = Vec::with_capacity(sim.len());
    let mut max_alt: f64 = 0.0;
    let mut last_psp = 0.0;
    let (mut psp_sq, mut psp_n) = (0.0, 0usize);
    let (mut t_sq, mut t_n) = (0.0, 0usize);
    for (r, s) in telemetry.rows.iter().zip(&sim) {
        let d: [Option<f64>; 6] = std::array::from_fn(|k| r.compared[k].map(|m| s[k] - m));
        if let Some(v) = d[0] {
            max_alt = max_alt.max(v.abs());
        }
        if let Some(v) = d[1] {
            last_psp = v.abs();
            psp_sq += v * v;
            psp_n += 1;
        }
        for v in d[2..].iter().flatten() {
            t_sq += v * v;
            t_n += 1;
        }
        rows.push(ComparisonRow { t: r.t, d });
    }
    let rms = |sq: f64, n: usize| if n == 0 { 0.0 } else { (sq / n as f64).sqrt() };
    let (sign_agreement, intervals) = sign_agreement(telemetry, &timeline, &sim);
    Ok(ComparisonReport {
        summary: ReplaySummary {
            samples: rows.len(),
            max_abs_alt_m: max_alt,
            accumulated_p_sp_pa: last_psp,
            p_sp_rms_pa: rms(psp_sq, psp_n),
            temp_rms_k: rms(t_sq, t_n),
            sign_agreement,
            intervals,
        },
        rows,
    })
}

/// For every pump-on or vent-open command, compares the sign of the altitude
/// change up to the next such command (or the end of the record).
fn sign_agreement(tel: &Telemetry, timeline: &Timeline, sim: &[[f64; 6]]) -> (Option<f64>, usize) {
    let starts: Vec<f64> = timeline
        .commands()
        .iter()
        .filter(|c| matches!(c.action, TransferAction::PumpOn | TransferAction::VentOpen))
        .map(|c| c.t)
        .collect();
    let alt_at = |t: f64| -> Option<(f64, f64)> {
        let i = tel.rows.partition_point(|r| r.t < t).min(tel.rows.len() - 1);
        tel.rows[i].compared[0].map(|m| (m, sim[i][0]))
    };
    let mut agree = 0usize;
    let mut n = 0usize;
    for (k, &t0) in starts.iter().enumerate() {
        let t1 = starts.get(k + 1).copied().unwrap_or_else(|| tel.t_end());
        let (Some((m0, s0)), Some((m1, s1))) = (alt_at(t0), alt_at(t1)) else {
            continue;
        };
        n += 1;
        if (m1 - m0).signum() == (s1 - s0).signum() {
            agree += 1;
        }
    }
    if n == 0 {
        (None, 0)
    } else {
        (Some(agree as f64 / n as f64), n)
    }
}
