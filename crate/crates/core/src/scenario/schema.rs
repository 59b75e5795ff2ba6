//! On-disk layout of `scenario.cfg`.

use crate::dynamics::AerobotConfig;
use serde::{Deserialize, Serialize};

fn default_dt() -> f64 {
    0.5
}

fn default_record() -> f64 {
    1.0
}

fn default_axis_rho() -> usize {
    16
}

fn default_axis_fill() -> usize {
    32
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ScenarioFile {
    pub name: String,
    pub planet: String,
    pub t_end_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_record")]
    pub record_interval_s: f64,
    pub atmosphere: AtmosphereSection,
    pub launch: LaunchSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solar: Option<SolarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commands: Option<CommandsSection>,
    #[serde(default)]
    pub table: TableSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_budget: Option<MassBudget>,
    pub aerobot: AerobotConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct AtmosphereSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winds: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_alt_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct LaunchSection {
    pub altitude_m: f64,
    #[serde(default)]
    pub lat_deg: f64,
    #[serde(default)]
    pub lon_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_solar_time_h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SolarSection {
    /// Length of the solar day at a fixed surface point [s].
    pub day_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CommandsSection {
    pub file: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TableSection {
    #[serde(default = "default_axis_rho")]
    pub n_rho: usize,
    #[serde(default = "default_axis_fill")]
    pub n_fill: usize,
}

impl Default for TableSection {
    fn default() -> Self {
        Self { n_rho: default_axis_rho(), n_fill: default_axis_fill() }
    }
}

/// Which products a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default)]
    pub ground_track: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { trajectory: true, ground_track: false }
    }
}

/// Optional breakdown of the flight-system masses, checked against the aerobot
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassBudget {
    /// Both envelope films.
    pub balloon_system_kg: f64,
    /// Buoyancy control module (pump, valves, plumbing).
    pub bcm_kg: f64,
    pub gondola_kg: f64,
}
