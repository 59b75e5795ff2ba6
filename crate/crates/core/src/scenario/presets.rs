//! Scenario bundles compiled into the binary.

use super::{parse_scenario, FileSource, Scenario, ScenarioError};

struct Embedded(&'static [(&'static str, &'static str)]);

impl FileSource for Embedded {
    fn read(&self, rel: &str) -> Result<String, String> {
        self.0
            .iter()
            .find(|(name, _)| *name == rel)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| format!("{rel} is not part of the bundle"))
    }
}

const NEVADA: &[(&str, &str)] = &[
    ("scenario.cfg", include_str!("../../presets/nevada-flight2/scenario.cfg")),
    ("winds.csv", include_str!("../../presets/nevada-flight2/winds.csv")),
    ("radiation.csv", include_str!("../../presets/nevada-flight2/radiation.csv")),
    ("commands.csv", include_str!("../../presets/nevada-flight2/commands.csv")),
];

const VENUS_B2: &[(&str, &str)] = &[
    ("scenario.cfg", include_str!("../../presets/venus-b2/scenario.cfg")),
    ("winds.csv", include_str!("../../presets/venus-b2/winds.csv")),
    ("radiation.csv", include_str!("../../presets/venus-b2/radiation.csv")),
];

const PRESETS: &[(&str, &[(&str, &str)])] = &[("nevada-flight2", NEVADA), ("venus-b2", VENUS_B2)];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Loads a bundled preset by name (`nevada-flight2`, `venus-b2`).
pub fn load_preset(name: &str) -> Result<Scenario, ScenarioError> {
    let (_, files) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnknownPreset(name.to_string()))?;
    let src = Embedded(files);
    let text = src.read("scenario.cfg").map_err(|m| ScenarioError::Io { path: name.into(), message: m })?;
    parse_scenario(&text, &src)
}
