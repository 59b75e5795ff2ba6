//! Multi-day Venus runs with wind-advected ground tracks.

use super::{Planet, Scenario, ScenarioError};
use crate::dynamics::TrajectoryRecord;
use crate::shape::ShapeTable;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::sync::Arc;

pub const GROUND_TRACK_HEADER: &str = "t_s,lat_deg,lon_deg,alt_m,lst_h,daylight";

/// Entry point on the planet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub lat_deg: f64,
    pub local_solar_time_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTrackRow {
    pub t: f64,
    pub lat_deg: f64,
    /// Unwrapped: accumulates past ±180° so circumnavigations can be counted.
    pub lon_deg: f64,
    pub alt: f64,
    pub lst_h: f64,
    pub daylight: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VenusRun {
    pub record: TrajectoryRecord,
    pub track: Vec<GroundTrackRow>,
}

impl VenusRun {
    /// Ground track CSV; longitude is wrapped into [-180, 180).
    pub fn track_csv(&self) -> String {
        let mut s = String::from(GROUND_TRACK_HEADER);
        s.push('\n');
        for r in &self.track {
            let lon = (r.lon_deg + 180.0).rem_euclid(360.0) - 180.0;
            let _ = writeln!(s, "{},{},{},{},{},{}", r.t, r.lat_deg, lon, r.alt, r.lst_h, r.daylight as u8);
        }
        s
    }
}

/// Runs `scenario` (a Venus scenario with a solar clock) for `days` Earth days
/// from `entry`, at the scenario's launch longitude and altitude.
pub fn venus_preset_run(
    scenario: &Scenario,
    entry: Entry,
    days: f64,
    table: Option<Arc<ShapeTable>>,
) -> Result<VenusRun, ScenarioError> {
    if scenario.planet != Planet::Venus {
        return Err(super::field("planet", "a Venus scenario is required"));
    }
    if scenario.solar_day_s.is_none() {
        return Err(super::field("solar", "a Venus run needs a [solar] section"));
    }
    if !(days > 0.0) {
        return Err(super::field("days", format!("must be positive, got {days}")));
    }
    let mut s = scenario.clone();
    s.launch.lat_deg = entry.lat_deg;
    s.launch.local_solar_time_h = Some(entry.local_solar_time_h);
    s.t_end_s = days * 86_400.0;
    let clock = s.solar_clock().expect("solar section checked above");
    let record = s.simulate(table)?;
    let track = record
        .rows
        .iter()
        .map(|r| GroundTrackRow {
            t: r.t,
            lat_deg: r.lat.to_degrees(),
            lon_deg: r.lon.to_degrees(),
            alt: r.alt,
            lst_h: clock.local_solar_time(r.lon, r.t),
            daylight: clock.zenith(r.lat, r.lon, r.t) < FRAC_PI_2,
        })
        .collect();
    Ok(VenusRun { record, track })
}
