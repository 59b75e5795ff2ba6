//! Aerobot configuration: envelope, masses, devices, optics and initial fill.

use super::DynamicsError;
use crate::aero::AeroCoefficients;
use crate::gastransfer::TransferDeviceSpec;
use crate::heat::HeatConfig;
use crate::shape::{EnvelopeSpec, InflatedCurve};
use serde::{Deserialize, Serialize};

/// Sphere-cone-sphere envelope description with film masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub zp_upper_diameter_m: f64,
    pub zp_lower_diameter_m: f64,
    /// Cone half angle measured from the vertical axis [deg].
    pub cone_half_angle_deg: f64,
    pub sp_diameter_m: f64,
    pub zp_film_mass_kg: f64,
    pub sp_film_mass_kg: f64,
}

impl EnvelopeConfig {
    pub fn build(&self) -> Result<EnvelopeSpec, DynamicsError> {
        let curve = InflatedCurve::sphere_cone_sphere(
            self.zp_upper_diameter_m,
            self.zp_lower_diameter_m,
            self.cone_half_angle_deg.to_radians(),
        )?;
        Ok(EnvelopeSpec::from_film_masses(
            0.5 * self.sp_diameter_m,
            curve,
            self.zp_film_mass_kg,
            self.sp_film_mass_kg,
        )?)
    }
}

/// Film specific heats [J/(kg·K)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmThermal {
    pub zp_cp: f64,
    pub sp_cp: f64,
}

impl Default for FilmThermal {
    fn default() -> Self {
        Self { zp_cp: 1100.0, sp_cp: 1300.0 }
    }
}

/// Initial helium inventory. Exactly one way of fixing the ZP fill must resolve:
/// an explicit mass, a free lift, or both (then they must agree within 1 g).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FillConfig {
    pub m_sp_kg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_zp_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_lift_kg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AerobotConfig {
    pub envelope: EnvelopeConfig,
    pub payload_kg: f64,
    pub fill: FillConfig,
    pub devices: TransferDeviceSpec,
    #[serde(default)]
    pub aero: AeroCoefficients,
    #[serde(default)]
    pub heat: HeatConfig,
    #[serde(default)]
    pub film: FilmThermal,
    /// Count poppet outflow enthalpy in the ZP energy balance.
    #[serde(default = "yes")]
    pub poppet_enthalpy: bool,
    /// Chamber floor as a fraction of the initial fill.
    #[serde(default = "default_floor")]
    pub mass_floor_fraction: f64,
}

fn yes() -> bool {
    true
}

fn default_floor() -> f64 {
    0.01
}

impl AerobotConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::Config(m.to_string()));
        if !(self.payload_kg > 0.0) {
            return bad("aerobot.payload_kg must be positive");
        }
        if !(self.envelope.zp_film_mass_kg > 0.0 && self.envelope.sp_film_mass_kg > 0.0) {
            return bad("aerobot.envelope film masses must be positive");
        }
        if !(self.fill.m_sp_kg > 0.0) {
            return bad("aerobot.fill.m_sp_kg must be positive");
        }
        if self.fill.m_zp_kg.is_none() && self.fill.free_lift_kg.is_none() {
            return bad("aerobot.fill needs m_zp_kg or free_lift_kg");
        }
        if self.fill.m_zp_kg.is_some_and(|m| !(m > 0.0)) {
            return bad("aerobot.fill.m_zp_kg must be positive");
        }
        if !(self.film.zp_cp > 0.0 && self.film.sp_cp > 0.0) {
            return bad("aerobot.film specific heats must be positive");
        }
        if !(self.mass_floor_fraction > 0.0 && self.mass_floor_fraction < 1.0) {
            return bad("aerobot.mass_floor_fraction must lie in (0, 1)");
        }
        self.devices
            .validate()
            .map_err(|e| DynamicsError::Config(format!("aerobot.devices: {e}")))?;
        self.heat
            .validate()
            .map_err(|e| DynamicsError::Config(format!("aerobot.heat: {e}")))?;
        let a = &self.aero;
        if !(a.cd_top > 0.0 && a.cd_side > 0.0 && a.c_m > 0.0 && a.a_ref >= 0.0) {
            return bad("aerobot.aero coefficients must be positive");
        }
        Ok(())
    }

    /// Aero coefficients with the reference area resolved to the inflated top
    /// projection when left at zero.
    pub fn resolved_aero(&self, spec: &EnvelopeSpec) -> AeroCoefficients {
        let mut a = self.aero;
        if a.a_ref == 0.0 {
            a.a_ref = spec.inflated_top_area();
        }
        a
    }

    /// Everything except helium.
    pub fn dry_mass(&self) -> f64 {
        self.payload_kg + self.envelope.zp_film_mass_kg + self.envelope.sp_film_mass_kg
    }
}
