//! Natural-shape meridian equations and the loads that set their start conditions.

use super::{EnvelopeSpec, ShapeError};
use std::f64::consts::PI;

/// Meridian state `(theta, q, r, z)`, with `q = 1/(r σ_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridianState {
    pub theta: f64,
    pub q: f64,
    pub r: f64,
    pub z: f64,
}

/// Parameters of the meridian equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    /// Film areal weight [N/m²].
    pub w: f64,
    /// Buoyancy gradient g·ρ_diff [N/m³].
    pub b: f64,
    /// Hydrostatic head offset: the pressure term uses `z + head_offset`. With the
    /// zero-pressure height `z_p0` measured from the bottom apex, `head_offset = −z_p0`.
    pub head_offset: f64,
}

/// d/ds of the meridian state.
pub fn shape_rhs(y: MeridianState, p: ShapeParams) -> Result<MeridianState, ShapeError> {
    if !(y.r > 0.0) || !(y.q > 0.0) {
        return Err(ShapeError::Singular { r: y.r, q: y.q });
    }
    let (st, ct) = y.theta.sin_cos();
    let qr = y.q * y.r;
    Ok(MeridianState {
        theta: -qr * p.w * st - qr * p.b * (y.z + p.head_offset),
        q: -y.q * y.q * p.w * y.r * ct,
        r: st,
        z: ct,
    })
}

/// Net pressure force on the part of the zero-pressure film wrapped around the SP
/// sphere from its bottom pole up to polar angle `beta`.
pub fn base_buoyancy(beta: f64, z_p0: f64, rho_diff: f64, r_sp: f64, g: f64) -> f64 {
    let b = g * rho_diff;
    PI * beta.sin().powi(2) * b * (z_p0 - r_sp) * r_sp * r_sp
        + 2.0 * PI / 3.0 * (1.0 - beta.cos().powi(3)) * b * r_sp.powi(3)
}

/// Loads carried by the envelope apart from its own geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeLoad {
    pub m_payload: f64,
    pub m_sp_gas: f64,
    /// Zero-pressure helium density [kg/m³].
    pub rho_zp: f64,
    pub gravity: f64,
}

/// Vertical film tension at the separation point `s0 = R_SP·beta`.
pub fn initial_tension(
    spec: &EnvelopeSpec,
    load: &ShapeLoad,
    rho_diff: f64,
    beta: f64,
    z_p0: f64,
) -> Result<f64, ShapeError> {
    let tension = tension_unchecked(spec, load, rho_diff, beta, z_p0);
    if !(tension > 0.0) {
        return Err(ShapeError::SlackBase { tension });
    }
    Ok(tension)
}

pub(crate) fn tension_unchecked(
    spec: &EnvelopeSpec,
    load: &ShapeLoad,
    rho_diff: f64,
    beta: f64,
    z_p0: f64,
) -> f64 {
    let r = spec.r_sp;
    let g = load.gravity;
    let z0 = r * (1.0 - beta.cos());
    let zp_base_area = 2.0 * PI * r * z0;
    let carried = load.m_payload
        + spec.areal_mass_zp * zp_base_area
        + spec.areal_mass_sp * 4.0 * PI * r * r
        + load.m_sp_gas
        - 4.0 / 3.0 * PI * load.rho_zp * r.powi(3);
    g * carried - base_buoyancy(beta, z_p0, rho_diff, r, g)
}
