//! Built-in profiles from the density-equivalence table between the Venus cloud
//! layer and the Earth test column (US Standard Atmosphere with a +20 °C offset).

use super::{AmbientGas, AtmRow, AtmosphereProfile, WindTable};
use crate::constants::{EARTH_GRAVITY, VENUS_GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinProfile {
    UsStandardOffset20,
    ViraClouds,
}

impl BuiltinProfile {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "us-standard-offset20" => Some(Self::UsStandardOffset20),
            "vira-clouds" => Some(Self::ViraClouds),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::UsStandardOffset20 => "us-standard-offset20",
            Self::ViraClouds => "vira-clouds",
        }
    }
}

// (altitude km, density kg/m³, temperature °C)
const VENUS: [(f64, f64, f64); 11] = [
    (52.0, 1.28, 60.2),
    (53.0, 1.15, 49.9),
    (54.0, 1.03, 39.7),
    (55.0, 0.92, 29.2),
    (56.0, 0.82, 18.7),
    (57.0, 0.72, 9.4),
    (58.0, 0.63, 2.1),
    (59.0, 0.54, -4.4),
    (60.0, 0.47, -10.4),
    (61.0, 0.41, -14.5),
    (62.0, 0.34, -18.7),
];

const EARTH: [(f64, f64, f64); 10] = [
    (0.0, 1.15, 35.0),
    (1.1, 1.03, 27.9),
    (2.2, 0.92, 20.7),
    (3.3, 0.82, 13.6),
    (4.5, 0.72, 5.8),
    (5.7, 0.63, -2.1),
    (7.0, 0.54, -10.5),
    (8.2, 0.47, -18.3),
    (9.4, 0.41, -26.1),
    (10.8, 0.34, -35.2),
];

/// Returns the tabulated columns as a profile with calm winds. Pressure is derived
/// from the tabulated density and temperature so every row is exactly ideal-gas
/// consistent.
pub fn builtin_profile(which: BuiltinProfile) -> AtmosphereProfile {
    let (table, gas, g): (&[(f64, f64, f64)], _, _) = match which {
        BuiltinProfile::UsStandardOffset20 => (&EARTH, AmbientGas::Air, EARTH_GRAVITY),
        BuiltinProfile::ViraClouds => (&VENUS, AmbientGas::Co2Mix, VENUS_GRAVITY),
    };
    let rs = gas.specific_gas_constant();
    let rows = table
        .iter()
        .map(|&(km, rho, c)| {
            let t = c + 273.15;
            AtmRow {
                alt_m: km * 1000.0,
                pressure_pa: rho * rs * t,
                temp_k: t,
                density_kgm3: rho,
            }
        })
        .collect();
    AtmosphereProfile::new(rows, WindTable::calm(), g, gas)
        .expect("built-in tables satisfy the profile invariants")
}
