//! Energy balances of the two helium chambers and ideal-gas closure.
//!
//! Both chambers are open systems: mass crosses their boundaries through the pump
//! and vent, carrying enthalpy. The SP chamber is rigid; the ZP chamber does boundary
//! work as it expands.

use crate::constants::{HELIUM_CP, HELIUM_CV, HELIUM_R};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("gas state inputs must be positive (m = {m}, T = {t})")]
    NonPositive { m: f64, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasProperties {
    pub cv: f64,
    pub cp: f64,
    pub r: f64,
}

impl GasProperties {
    pub const HELIUM: GasProperties = GasProperties {
        cv: HELIUM_CV,
        cp: HELIUM_CP,
        r: HELIUM_R,
    };

    pub fn k(&self) -> f64 {
        self.cp / self.cv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chamber {
    Sp,
    Zp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasChamberState {
    pub chamber: Chamber,
    pub m: f64,
    pub t: f64,
    pub v: f64,
    pub p: f64,
}

/// Temperature rate of the rigid SP chamber [K/s].
pub fn sp_temp_rate(m: f64, t: f64, mdot: f64, qdot: f64, dh: f64, props: &GasProperties) -> f64 {
    (-mdot * props.cv * t + qdot + dh) / (m * props.cv)
}

/// Temperature rate of the ZP chamber including boundary work `p·vdot` [K/s].
#[allow(clippy::too_many_arguments)]
pub fn zp_temp_rate(
    m: f64,
    t: f64,
    mdot: f64,
    qdot: f64,
    p: f64,
    vdot: f64,
    dh: f64,
    props: &GasProperties,
) -> f64 {
    (-mdot * props.cv * t + qdot - p * vdot + dh) / (m * props.cv)
}

/// ZP temperature rate when the chamber follows a prescribed pressure history
/// (`V = mRT/P`), with the boundary work eliminated: substituting
/// `P·V̇ = R·ṁ·T + m·R·Ṫ − V·Ṗ` into the energy balance gives a closed form.
/// Returns (Ṫ, V̇).
#[allow(clippy::too_many_arguments)]
pub fn zp_pressure_following_rates(
    m: f64,
    t: f64,
    v: f64,
    p: f64,
    pdot: f64,
    mdot: f64,
    qdot: f64,
    dh: f64,
    props: &GasProperties,
) -> (f64, f64) {
    let a = -mdot * props.cv * t + qdot + dh;
    let tdot = (a - props.r * mdot * t + v * pdot) / (m * props.cp);
    let vdot = (props.r * (mdot * t + m * tdot) - v * pdot) / p;
    (tdot, vdot)
}

/// Enthalpy flows of the adiabatic pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpEnthalpy {
    pub h_in: f64,
    pub h_out: f64,
    pub t_out: f64,
}

/// Adiabatic compression from ZP temperature; the pressure ratio is taken against
/// the ambient pressure.
pub fn pump_enthalpy(
    mdot: f64,
    t_zp: f64,
    p_sp: f64,
    p_atm: f64,
    props: &GasProperties,
) -> PumpEnthalpy {
    let k = props.k();
    let t_out = t_zp * (p_sp / p_atm).powf((k - 1.0) / k);
    PumpEnthalpy {
        h_in: mdot * props.cp * t_zp,
        h_out: mdot * props.cp * t_out,
        t_out,
    }
}

/// Isenthalpic vent: (Ḣ_in, Ḣ_out), identical by construction.
pub fn vent_enthalpy(mdot: f64, t_sp: f64, props: &GasProperties) -> (f64, f64) {
    let h = mdot * props.cp * t_sp;
    (h, h)
}

/// Envelope node temperature rate [K/s].
pub fn node_temp_rate(qdot: f64, heat_capacity: f64) -> f64 {
    qdot / heat_capacity
}

/// How the chamber volume or pressure is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    /// Rigid chamber of the given volume.
    FixedVolume(f64),
    /// Pressure imposed by the surroundings; the volume follows, up to `v_max`.
    PressureMatch { p_ref: f64, v_max: f64 },
}

/// Zero-pressure chamber regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZpMode {
    Slack,
    FullyInflated,
}

impl ZpMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ZpMode::Slack => "slack",
            ZpMode::FullyInflated => "full",
        }
    }
}

/// Closes (P, V) from mass and temperature. A pressure-matched chamber whose
/// ideal-gas volume exceeds `v_max` is returned at `v_max` with the pressure free,
/// which is the fully inflated (superpressure) regime.
pub fn close_gas_state(
    chamber: Chamber,
    m: f64,
    t: f64,
    closure: Closure,
    props: &GasProperties,
) -> Result<(GasChamberState, ZpMode), ThermoError> {
    if !(m > 0.0 && t > 0.0) {
        return Err(ThermoError::NonPositive { m, t });
    }
    let mrt = m * props.r * t;
    Ok(match closure {
        Closure::FixedVolume(v) => (
            GasChamberState {
                chamber,
                m,
                t,
                v,
                p: mrt / v,
            },
            ZpMode::FullyInflated,
        ),
        Closure::PressureMatch { p_ref, v_max } => {
            let v = mrt / p_ref;
            if v > v_max {
                (
                    GasChamberState {
                        chamber,
                        m,
                        t,
                        v: v_max,
                        p: mrt / v_max,
                    },
                    ZpMode::FullyInflated,
                )
            } else {
                (
                    GasChamberState {
                        chamber,
                        m,
                        t,
                        v,
                        p: p_ref,
                    },
                    ZpMode::Slack,
                )
            }
        }
    })
}
