//! Six-node heat network: four envelope nodes plus the two gas volumes.
//!
//! Node indices used throughout: 0..=3 are envelope nodes 1..4 (bottom contact patch,
//! SP upper surface, ZP side, ZP top), 4 is the SP gas and 5 the ZP gas.

use crate::atmosphere::{AmbientGas, Fluxes};
use crate::constants::{HELIUM_R, STEFAN_BOLTZMANN};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub const N_NODES: usize = 6;
pub const SP_GAS: usize = 4;
pub const ZP_GAS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatError {
    #[error("node {node} has non-positive area {area}")]
    MissingArea { node: usize, area: f64 },
    #[error("invalid optics: {0}")]
    Optics(String),
    #[error("view factors violate reciprocity between faces {i} and {j}")]
    Reciprocity { i: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceOptics {
    pub alpha: f64,
    pub epsilon: f64,
}

impl SurfaceOptics {
    pub fn validate(&self) -> Result<(), HeatError> {
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.epsilon) {
            return Err(HeatError::Optics(format!(
                "alpha {} and epsilon {} must lie in [0, 1]",
                self.alpha, self.epsilon
            )));
        }
        Ok(())
    }
}

/// Power-law transport properties, `x(T) = x_ref (T / 300 K)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasTransport {
    pub mu_ref: f64,
    pub mu_exp: f64,
    pub k_ref: f64,
    pub k_exp: f64,
    pub prandtl: f64,
}

impl GasTransport {
    pub const AIR: GasTransport = GasTransport {
        mu_ref: 1.846e-5,
        mu_exp: 0.7,
        k_ref: 0.0263,
        k_exp: 0.81,
        prandtl: 0.71,
    };
    pub const HELIUM: GasTransport = GasTransport {
        mu_ref: 1.99e-5,
        mu_exp: 0.68,
        k_ref: 0.155,
        k_exp: 0.69,
        prandtl: 0.67,
    };
    pub const CO2: GasTransport = GasTransport {
        mu_ref: 1.50e-5,
        mu_exp: 0.92,
        k_ref: 0.0166,
        k_exp: 1.34,
        prandtl: 0.77,
    };

    pub fn for_ambient(gas: AmbientGas) -> Self {
        match gas {
            AmbientGas::Air => Self::AIR,
            AmbientGas::Co2Mix => Self::CO2,
        }
    }

    pub fn viscosity(&self, t: f64) -> f64 {
        self.mu_ref * (t / 300.0).powf(self.mu_exp)
    }

    pub fn conductivity(&self, t: f64) -> f64 {
        self.k_ref * (t / 300.0).powf(self.k_exp)
    }
}

/// One envelope node's exchange with the environment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExternalFlux {
    pub solar: f64,
    pub ir_in: f64,
    pub ir_out: f64,
}

impl ExternalFlux {
    pub fn net(&self) -> f64 {
        self.solar + self.ir_in - self.ir_out
    }
}

pub fn external_flux(optics: SurfaceOptics, area: f64, e_solar: f64, e_ir: f64, t: f64) -> ExternalFlux {
    ExternalFlux {
        solar: optics.alpha * area * e_solar,
        ir_in: optics.epsilon * area * e_ir,
        ir_out: optics.epsilon * area * STEFAN_BOLTZMANN * t.powi(4),
    }
}

/// Net IR from surface i to surface j through the two-gray-surface resistance network.
pub fn ir_exchange(ti: f64, tj: f64, ei: f64, ej: f64, ai: f64, aj: f64, f_ij: f64) -> f64 {
    if ei <= 0.0 || ej <= 0.0 || f_ij <= 0.0 {
        return 0.0;
    }
    let resistance = (1.0 - ei) / (ei * ai) + 1.0 / (f_ij * ai) + (1.0 - ej) / (ej * aj);
    STEFAN_BOLTZMANN * (ti.powi(4) - tj.powi(4)) / resistance
}

pub fn nusselt_natural(ra: f64) -> f64 {
    2.0 + 0.6 * ra.max(0.0).powf(0.25)
}

pub const FORCED_TRANSITION_RE: f64 = 5.38e5;

pub fn nusselt_forced(re: f64) -> f64 {
    let re = re.max(0.0);
    if re <= FORCED_TRANSITION_RE {
        0.37 * re.powf(0.6)
    } else {
        0.74 * re.powf(0.6)
    }
}

/// Signed convective flow from the hot side to the cold side.
pub fn convective_flow(nu: f64, k: f64, l: f64, area: f64, t_hot: f64, t_cold: f64) -> f64 {
    nu * k / l * area * (t_hot - t_cold)
}

/// Rayleigh number with the ideal-gas expansion coefficient `1/T_film`.
pub fn rayleigh(g: f64, dt: f64, t_film: f64, l: f64, rho: f64, transport: &GasTransport) -> f64 {
    let mu = transport.viscosity(t_film);
    g * (dt.abs() / t_film) * l.powi(3) * rho * rho * transport.prandtl / (mu * mu)
}

pub fn reynolds(rho: f64, speed: f64, l: f64, mu: f64) -> f64 {
    rho * speed * l / mu
}

/// Radiating faces of the network. Node 2 is a film with one face in each cavity.
pub const FACES: usize = 7;
const FACE_NODE: [usize; FACES] = [0, 1, 1, 2, 3, SP_GAS, ZP_GAS];
const SP_CAVITY: [usize; 3] = [0, 1, 5];
const ZP_CAVITY: [usize; 4] = [2, 3, 4, 6];

/// A view-factor replacement between two faces; the reverse factor follows by reciprocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewFactorOverride {
    pub from: usize,
    pub to: usize,
    pub value: f64,
}

/// View factors over the seven faces: node 1 interior, node 2 SP side, node 2 ZP side,
/// node 3, node 4, SP gas, ZP gas.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationNetwork {
    pub areas: [f64; FACES],
    pub f: [[f64; FACES]; FACES],
}

impl RadiationNetwork {
    /// Enclosure approximation inside each cavity: `f[i→j] = A_j / ΣA_cavity`.
    pub fn enclosure(
        node_areas: [f64; 4],
        gas_areas: [f64; 2],
        overrides: &[ViewFactorOverride],
    ) -> Result<Self, HeatError> {
        let areas = [
            node_areas[0],
            node_areas[1],
            node_areas[1],
            node_areas[2],
            node_areas[3],
            gas_areas[0],
            gas_areas[1],
        ];
        for (i, a) in areas.iter().enumerate() {
            if !(*a > 0.0) {
                return Err(HeatError::MissingArea { node: FACE_NODE[i], area: *a });
            }
        }
        let mut f = [[0.0; FACES]; FACES];
        for cavity in [&SP_CAVITY[..], &ZP_CAVITY[..]] {
            let total: f64 = cavity.iter().map(|&i| areas[i]).sum();
            for &i in cavity {
                for &j in cavity {
                    if i != j {
                        f[i][j] = areas[j] / total;
                    }
                }
            }
        }
        for o in overrides {
            if o.from >= FACES || o.to >= FACES || o.from == o.to || !(0.0..=1.0).contains(&o.value) {
                return Err(HeatError::Optics(format!("bad view factor override {o:?}")));
            }
            f[o.from][o.to] = o.value;
            f[o.to][o.from] = o.value * areas[o.from] / areas[o.to];
        }
        let net = Self { areas, f };
        net.check()?;
        Ok(net)
    }

    pub fn check(&self) -> Result<(), HeatError> {
        for i in 0..FACES {
            let row: f64 = self.f[i].iter().sum();
            if row > 1.0 + 1e-12 {
                return Err(HeatError::Optics(format!("face {i} view factors sum to {row}")));
            }
            for j in 0..FACES {
                let (a, b) = (self.areas[i] * self.f[i][j], self.areas[j] * self.f[j][i]);
                if (a - b).abs() > 1e-6 * a.abs().max(b.abs()) {
                    return Err(HeatError::Reciprocity { i, j });
                }
            }
        }
        Ok(())
    }
}

/// Sphere-equivalent surface of a gas volume, used as its radiating area.
pub fn gas_radiating_area(volume: f64) -> f64 {
    (36.0 * PI * volume * volume).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatConfig {
    /// Outward-facing optics of nodes 1..4 (node 2 has no exterior face).
    pub exterior: [SurfaceOptics; 4],
    /// Emissivity of the inward faces of nodes 1..4.
    pub interior_emissivity: [f64; 4],
    pub gas_emissivity: f64,
    /// Envelope normal angle (from vertical, degrees) separating node 3 from node 4.
    pub top_split_deg: f64,
}

impl HeatConfig {
    pub const ZP_FILM: SurfaceOptics = SurfaceOptics { alpha: 0.08, epsilon: 0.52 };
    pub const SP_EMISSIVITY: f64 = 0.85;

    pub fn validate(&self) -> Result<(), HeatError> {
        for o in &self.exterior {
            o.validate()?;
        }
        for e in self.interior_emissivity.iter().chain([&self.gas_emissivity]) {
            if !(0.0..=1.0).contains(e) {
                return Err(HeatError::Optics(format!("emissivity {e} outside [0, 1]")));
            }
        }
        if !(self.top_split_deg > 0.0 && self.top_split_deg < 90.0) {
            return Err(HeatError::Optics(format!("top split angle {} deg", self.top_split_deg)));
        }
        Ok(())
    }

    fn face_emissivity(&self, face: usize) -> f64 {
        match face {
            0 => self.interior_emissivity[0],
            1 | 2 => self.interior_emissivity[1],
            3 => self.interior_emissivity[2],
            4 => self.interior_emissivity[3],
            _ => self.gas_emissivity,
        }
    }
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            exterior: [Self::ZP_FILM, SurfaceOptics { alpha: 0.0, epsilon: 0.0 }, Self::ZP_FILM, Self::ZP_FILM],
            interior_emissivity: [Self::SP_EMISSIVITY, Self::SP_EMISSIVITY, 0.52, 0.52],
            gas_emissivity: 0.05,
            top_split_deg: 45.0,
        }
    }
}

/// Instantaneous inputs for one network evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatInputs {
    /// Temperatures in node order [1, 2, 3, 4, SP gas, ZP gas].
    pub temps: [f64; N_NODES],
    pub node_areas: [f64; 4],
    pub v_sp: f64,
    pub v_zp_gas: f64,
    pub p_sp: f64,
    pub p_zp: f64,
    pub sp_diameter: f64,
    pub bubble_diameter: f64,
    pub height: f64,
    pub fluxes: Fluxes,
    pub t_atm: f64,
    pub rho_atm: f64,
    pub ambient: AmbientGas,
    pub relative_speed: f64,
    pub gravity: f64,
}

/// Minimum relative speed used in the forced-convection correlation.
pub const MIN_RELATIVE_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeHeats {
    /// Net heat into each node [W].
    pub q: [f64; N_NODES],
    /// Environment part: solar, IR and atmospheric convection.
    pub external: [f64; N_NODES],
    /// Internal exchange part: IR between faces and gas convection.
    pub internal: [f64; N_NODES],
    /// Σ of |pairwise internal flows|, the scale for conservation checks.
    pub internal_gross: f64,
}

pub fn assemble_node_heats(cfg: &HeatConfig, x: &HeatInputs) -> Result<NodeHeats, HeatError> {
    let gas_areas = [gas_radiating_area(x.v_sp), gas_radiating_area(x.v_zp_gas)];
    let net = RadiationNetwork::enclosure(x.node_areas, gas_areas, &[])?;
    assemble_with_network(cfg, x, &net)
}

pub fn assemble_with_network(
    cfg: &HeatConfig,
    x: &HeatInputs,
    net: &RadiationNetwork,
) -> Result<NodeHeats, HeatError> {
    let mut out = NodeHeats::default();
    let t = &x.temps;
    let fl = &x.fluxes;

    let wiring = [(0, fl.up_solar, fl.up_ir), (2, fl.side_solar, fl.side_ir()), (3, fl.down_solar, fl.down_ir)];
    let atm = GasTransport::for_ambient(x.ambient);
    let speed = x.relative_speed.max(MIN_RELATIVE_SPEED);
    for (node, e_sol, e_ir) in wiring {
        let area = x.node_areas[node];
        let ext = external_flux(cfg.exterior[node], area, e_sol, e_ir, t[node]);
        let t_film = 0.5 * (t[node] + x.t_atm);
        let re = reynolds(x.rho_atm, speed, x.height, atm.viscosity(t_film));
        let conv = convective_flow(nusselt_forced(re), atm.conductivity(t_film), x.height, area, x.t_atm, t[node]);
        out.external[node] += ext.net() + conv;
    }

    let pair = |out: &mut NodeHeats, i: usize, j: usize, flow: f64| {
        out.internal[i] -= flow;
        out.internal[j] += flow;
        out.internal_gross += flow.abs();
    };

    for a in 0..FACES {
        for b in (a + 1)..FACES {
            let f = net.f[a][b];
            if f <= 0.0 {
                continue;
            }
            let (na, nb) = (FACE_NODE[a], FACE_NODE[b]);
            let flow = ir_exchange(
                t[na],
                t[nb],
                cfg.face_emissivity(a),
                cfg.face_emissivity(b),
                net.areas[a],
                net.areas[b],
                f,
            );
            pair(&mut out, na, nb, flow);
        }
    }

    let he = GasTransport::HELIUM;
    let gas_links: [(usize, usize, f64, f64); 5] = [
        (SP_GAS, 0, x.sp_diameter, x.p_sp),
        (SP_GAS, 1, x.sp_diameter, x.p_sp),
        (ZP_GAS, 1, x.bubble_diameter, x.p_zp),
        (ZP_GAS, 2, x.bubble_diameter, x.p_zp),
        (ZP_GAS, 3, x.bubble_diameter, x.p_zp),
    ];
    for (gas, node, l, p) in gas_links {
        let t_film = 0.5 * (t[gas] + t[node]);
        let rho = p / (HELIUM_R * t_film);
        let ra = rayleigh(x.gravity, t[gas] - t[node], t_film, l, rho, &he);
        let flow = convective_flow(nusselt_natural(ra), he.conductivity(t_film), l, x.node_areas[node], t[gas], t[node]);
        pair(&mut out, gas, node, flow);
    }

    for i in 0..N_NODES {
        out.q[i] = out.external[i] + out.internal[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn external_examples() {
        let z = external_flux(HeatConfig::ZP_FILM, 10.0, 0.0, 0.0, 0.0);
        assert_eq!((z.solar, z.ir_in, z.ir_out), (0.0, 0.0, 0.0));
        let s = external_flux(HeatConfig::ZP_FILM, 10.0, 1000.0, 0.0, 0.0);
        assert!((s.solar - 800.0).abs() < 1e-9);
        let e = external_flux(HeatConfig::ZP_FILM, 10.0, 0.0, 0.0, 300.0);
        let oracle = 0.52 * 10.0 * 5.67e-8 * 300f64.powi(4);
        assert!((e.ir_out - oracle).abs() < 1e-9);
        // Published hand value 2388.4 W; exact arithmetic gives 2388.20 W.
        assert!((e.ir_out - 2388.4).abs() / 2388.4 < 1e-4);
    }

    #[test]
    fn ir_examples() {
        assert_eq!(ir_exchange(300.0, 300.0, 0.5, 0.5, 1.0, 2.0, 0.3), 0.0);
        let bb = ir_exchange(310.0, 290.0, 1.0, 1.0, 20.0, 20.0, 1.0);
        assert!((bb - STEFAN_BOLTZMANN * 20.0 * (310f64.powi(4) - 290f64.powi(4))).abs() < 1e-9);
        let g = ir_exchange(310.0, 290.0, 0.52, 0.52, 20.0, 20.0, 1.0);
        let denom: f64 = 2.0 * (0.48 / (0.52 * 20.0)) + 1.0 / 20.0;
        assert!((denom - 0.14231).abs() < 1e-5);
        let oracle = 5.67e-8 * (310f64.powi(4) - 290f64.powi(4)) / denom;
        assert!((g - oracle).abs() < 1e-9);
        // Published hand value 860.3 W; exact arithmetic gives 861.57 W.
        assert!((g - 860.3).abs() / 860.3 < 2e-3);
        let back = ir_exchange(290.0, 310.0, 0.52, 0.52, 20.0, 20.0, 1.0);
        assert_eq!(g, -back);
        assert_eq!(ir_exchange(310.0, 290.0, 0.0, 0.5, 1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn nusselt_examples() {
        assert_eq!(nusselt_natural(0.0), 2.0);
        assert!((nusselt_forced(1e5) - 370.0).abs() < 1e-9);
        let lo = nusselt_forced(FORCED_TRANSITION_RE);
        let hi = nusselt_forced(FORCED_TRANSITION_RE * (1.0 + 1e-12));
        assert!((hi / lo - 2.0).abs() < 1e-9);
        assert!(nusselt_natural(1e6) > nusselt_natural(1e5));
    }

    #[test]
    fn convection_examples() {
        assert_eq!(convective_flow(2.0, 0.15, 5.0, 50.0, 300.0, 300.0), 0.0);
        assert!((convective_flow(2.0, 0.15, 5.0, 50.0, 310.0, 300.0) - 30.0).abs() < 1e-12);
        assert!((convective_flow(2.0, 0.15, 5.0, 100.0, 310.0, 300.0) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn enclosure_reciprocity() {
        let net = RadiationNetwork::enclosure([3.0, 17.0, 40.0, 25.0], [20.0, 80.0], &[]).unwrap();
        assert!(net.check().is_ok());
        assert_eq!(net.f[0][3], 0.0);
        let o = ViewFactorOverride { from: 3, to: 4, value: 0.2 };
        let net2 = RadiationNetwork::enclosure([3.0, 17.0, 40.0, 25.0], [20.0, 80.0], &[o]).unwrap();
        assert!((net2.f[4][3] - 0.2 * 40.0 / 25.0).abs() < 1e-15);
        assert!(RadiationNetwork::enclosure([0.0, 17.0, 40.0, 25.0], [20.0, 80.0], &[]).is_err());
    }
}
