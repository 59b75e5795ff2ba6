//! Tabulated planetary atmospheres, winds and radiative environments.
//!
//! Pressure and temperature are interpolated linearly in altitude and density is
//! recomputed from the ideal-gas law so that buoyancy and hydrostatics agree. Queries
//! slightly outside the table (100 m below, 2 km above) continue the terminal lapse
//! rate with a hydrostatic pressure law; anything farther out is an error.

mod builtin;
mod io;
mod radiation;
mod winds;

pub use builtin::{builtin_profile, BuiltinProfile};
pub use io::{
    load_profile, parse_atmosphere_csv, parse_radiation_csv, parse_winds_csv, serialize_profile,
    serialize_radiation, serialize_winds, ProfileFormat,
};
pub use radiation::{direct_solar, Fluxes, RadChannel, RadParam, RadiationEnvironment};
pub use winds::{WindParam, WindRow, WindTable};

use crate::constants::UNIVERSAL_GAS_CONSTANT;
use thiserror::Error;

/// Extrapolation allowance below the first table row [m].
pub const BELOW_TABLE_MARGIN: f64 = 100.0;
/// Extrapolation allowance above the last table row [m].
pub const ABOVE_TABLE_MARGIN: f64 = 2000.0;
/// Relative tolerance of the per-row ideal-gas check.
pub const CLOSURE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtmosphereError {
    #[error("altitude {altitude} m is outside the atmosphere table: {side} bound is {bound} m")]
    OutOfRange {
        altitude: f64,
        bound: f64,
        side: &'static str,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("radiation channel {0} is not defined")]
    MissingChannel(&'static str),
    #[error("radiation channel {0} is parameterised by zenith angle but no solar geometry is available")]
    NoZenith(&'static str),
}

/// Composition of the ambient gas, which fixes its specific gas constant and the
/// transport-property correlations used by the heat module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientGas {
    Air,
    Co2Mix,
}

impl AmbientGas {
    /// Mean molar mass [kg/mol].
    pub fn molar_mass(self) -> f64 {
        match self {
            AmbientGas::Air => UNIVERSAL_GAS_CONSTANT / 287.05,
            AmbientGas::Co2Mix => 0.043_45,
        }
    }

    /// Specific gas constant [J/(kg·K)].
    pub fn specific_gas_constant(self) -> f64 {
        match self {
            AmbientGas::Air => 287.05,
            AmbientGas::Co2Mix => UNIVERSAL_GAS_CONSTANT / 0.043_45,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AmbientGas::Air => "air",
            AmbientGas::Co2Mix => "co2-mix",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "air" => Some(AmbientGas::Air),
            "co2-mix" => Some(AmbientGas::Co2Mix),
            _ => None,
        }
    }
}

/// One tabulated thermodynamic row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmRow {
    pub alt_m: f64,
    pub pressure_pa: f64,
    pub temp_k: f64,
    pub density_kgm3: f64,
}

/// Atmospheric state at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereSample {
    pub pressure: f64,
    pub temperature: f64,
    pub density: f64,
    /// (east, north, up) [m/s].
    pub wind: [f64; 3],
}

/// Immutable tabulated atmosphere for one planet.
#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereProfile {
    rows: Vec<AtmRow>,
    pub winds: WindTable,
    pub surface_gravity: f64,
    pub gas: AmbientGas,
    /// Indices of rows whose tabulated density departs from P/(RT) by more than 2%.
    closure_flags: Vec<usize>,
}

impl AtmosphereProfile {
    /// Builds and validates a profile. Closure violations are flagged rather than
    /// rejected, since measured tables are allowed to be slightly inconsistent.
    pub fn new(
        rows: Vec<AtmRow>,
        winds: WindTable,
        surface_gravity: f64,
        gas: AmbientGas,
    ) -> Result<Self, AtmosphereError> {
        if rows.len() < 2 {
            return Err(AtmosphereError::Validation(
                "at least two rows are required".into(),
            ));
        }
        if !(surface_gravity > 0.0) {
            return Err(AtmosphereError::Validation(
                "surface gravity must be positive".into(),
            ));
        }
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].alt_m > w[0].alt_m) {
                return Err(AtmosphereError::Validation(format!(
                    "altitude strictly increasing (rows {} and {})",
                    i + 1,
                    i + 2
                )));
            }
            if !(w[1].pressure_pa < w[0].pressure_pa) {
                return Err(AtmosphereError::Validation(format!(
                    "pressure strictly decreasing with altitude (rows {} and {})",
                    i + 1,
                    i + 2
                )));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.density_kgm3 > 0.0) {
                return Err(AtmosphereError::Validation(format!(
                    "density > 0 (row {})",
                    i + 1
                )));
            }
            if !(r.temp_k > 0.0) {
                return Err(AtmosphereError::Validation(format!(
                    "temperature > 0 (row {})",
                    i + 1
                )));
            }
        }
        let rs = gas.specific_gas_constant();
        let closure_flags = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                let rho = r.pressure_pa / (rs * r.temp_k);
                ((rho - r.density_kgm3) / r.density_kgm3).abs() > CLOSURE_TOLERANCE
            })
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            rows,
            winds,
            surface_gravity,
            gas,
            closure_flags,
        })
    }

    pub fn rows(&self) -> &[AtmRow] {
        &self.rows
    }

    pub fn closure_flags(&self) -> &[usize] {
        &self.closure_flags
    }

    pub fn specific_gas_constant(&self) -> f64 {
        self.gas.specific_gas_constant()
    }

    pub fn with_winds(mut self, winds: WindTable) -> Self {
        self.winds = winds;
        self
    }

    /// Lowest and highest altitudes accepted by [`sample`](Self::sample).
    pub fn altitude_band(&self) -> (f64, f64) {
        (
            self.rows[0].alt_m - BELOW_TABLE_MARGIN,
            self.rows[self.rows.len() - 1].alt_m + ABOVE_TABLE_MARGIN,
        )
    }

    fn check_band(&self, altitude: f64) -> Result<(), AtmosphereError> {
        let (lo, hi) = self.altitude_band();
        if altitude.is_nan() || altitude < lo {
            return Err(AtmosphereError::OutOfRange {
                altitude,
                bound: lo,
                side: "lower",
            });
        }
        if altitude > hi {
            return Err(AtmosphereError::OutOfRange {
                altitude,
                bound: hi,
                side: "upper",
            });
        }
        Ok(())
    }

    /// Pressure and temperature at `altitude`.
    pub fn pressure_temperature(&self, altitude: f64) -> Result<(f64, f64), AtmosphereError> {
        self.check_band(altitude)?;
        let n = self.rows.len();
        let first = &self.rows[0];
        let last = &self.rows[n - 1];
        if altitude < first.alt_m {
            return Ok(self.extrapolate(first, &self.rows[1], altitude));
        }
        if altitude > last.alt_m {
            return Ok(self.extrapolate(last, &self.rows[n - 2], altitude));
        }
        let i = self
            .rows
            .partition_point(|r| r.alt_m <= altitude)
            .clamp(1, n - 1);
        let (a, b) = (&self.rows[i - 1], &self.rows[i]);
        let u = (altitude - a.alt_m) / (b.alt_m - a.alt_m);
        Ok((
            a.pressure_pa + u * (b.pressure_pa - a.pressure_pa),
            a.temp_k + u * (b.temp_k - a.temp_k),
        ))
    }

    /// Constant-lapse continuation from the terminal row `end`, using `inner` (its
    /// neighbour) to fix the lapse rate.
    fn extrapolate(&self, end: &AtmRow, inner: &AtmRow, altitude: f64) -> (f64, f64) {
        let lapse = (end.temp_k - inner.temp_k) / (end.alt_m - inner.alt_m);
        let dz = altitude - end.alt_m;
        let t = end.temp_k + lapse * dz;
        let k = self.surface_gravity / self.specific_gas_constant();
        let p = if lapse.abs() < 1e-12 {
            end.pressure_pa * (-k * dz / end.temp_k).exp()
        } else {
            end.pressure_pa * (t / end.temp_k).powf(-k / lapse)
        };
        (p, t)
    }

    /// Atmospheric state at `altitude` with the altitude-parameterised wind. Winds
    /// parameterised by time are evaluated at t = 0; use [`sample_at`](Self::sample_at)
    /// when a clock is available.
    pub fn sample(&self, altitude: f64) -> Result<AtmosphereSample, AtmosphereError> {
        self.sample_at(altitude, 0.0)
    }

    /// Atmospheric state at `altitude` and mission time `t`.
    pub fn sample_at(&self, altitude: f64, t: f64) -> Result<AtmosphereSample, AtmosphereError> {
        let (p, temp) = self.pressure_temperature(altitude)?;
        Ok(AtmosphereSample {
            pressure: p,
            temperature: temp,
            density: p / (self.specific_gas_constant() * temp),
            wind: self.winds.wind(altitude, t),
        })
    }

    /// dP/dz [Pa/m]. Inside the table this is the slope of the interpolant; outside
    /// it is the hydrostatic value −ρg of the extrapolation.
    pub fn pressure_gradient(&self, altitude: f64) -> Result<f64, AtmosphereError> {
        self.check_band(altitude)?;
        let n = self.rows.len();
        if altitude < self.rows[0].alt_m || altitude > self.rows[n - 1].alt_m {
            let s = self.sample(altitude)?;
            return Ok(-s.density * self.surface_gravity);
        }
        let i = self
            .rows
            .partition_point(|r| r.alt_m <= altitude)
            .clamp(1, n - 1);
        let (a, b) = (&self.rows[i - 1], &self.rows[i]);
        Ok((b.pressure_pa - a.pressure_pa) / (b.alt_m - a.alt_m))
    }
}

/// Free-function form of [`AtmosphereProfile::sample`].
pub fn sample(
    profile: &AtmosphereProfile,
    altitude: f64,
) -> Result<AtmosphereSample, AtmosphereError> {
    profile.sample(altitude)
}
