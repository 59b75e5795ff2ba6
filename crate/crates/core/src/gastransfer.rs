//! Helium transfer between the chambers (pump ZP→SP, vent SP→ZP) and out through the
//! apex termination poppet, plus the mass bookkeeping that goes with it.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("invalid transfer device: {0}")]
    InvalidDevice(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("command timeline: {0}")]
    Timeline(String),
}

/// Pump, vent and poppet hardware parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransferDeviceSpec {
    /// Fixed displacement rate [m³/s].
    pub pump_vdot: f64,
    pub vent_cd: f64,
    /// Vent orifice diameter [m].
    pub vent_d: f64,
    pub poppet_cd: f64,
    /// Poppet orifice diameter [m].
    pub poppet_d: f64,
}

impl TransferDeviceSpec {
    pub fn validate(&self) -> Result<(), TransferError> {
        let positive = [
            ("pump_vdot", self.pump_vdot),
            ("vent_d", self.vent_d),
            ("poppet_d", self.poppet_d),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TransferError::InvalidDevice(format!("{name} must be positive")));
            }
        }
        for (name, cd) in [("vent_cd", self.vent_cd), ("poppet_cd", self.poppet_cd)] {
            if !(cd > 0.0 && cd <= 1.0) {
                return Err(TransferError::InvalidDevice(format!("{name} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Mass flow through the fixed-displacement pump [kg/s].
pub fn pump_flow(rho_zp: f64, spec: &TransferDeviceSpec, on: bool) -> f64 {
    if on {
        rho_zp.max(0.0) * spec.pump_vdot
    } else {
        0.0
    }
}

/// Incompressible orifice flow `Cd·(π/4)·d²·√(2ρΔp)`, zero for non-positive Δp.
pub fn orifice_flow(cd: f64, d: f64, rho_up: f64, dp: f64) -> f64 {
    if dp <= 0.0 || rho_up <= 0.0 {
        return 0.0;
    }
    cd * 0.25 * PI * d * d * (2.0 * rho_up * dp).sqrt()
}

/// Vent flow SP→ZP [kg/s]; the check path blocks reverse flow.
pub fn vent_flow(rho_sp: f64, p_sp: f64, p_zp: f64, spec: &TransferDeviceSpec) -> f64 {
    orifice_flow(spec.vent_cd, spec.vent_d, rho_sp, p_sp - p_zp)
}

/// Poppet flow ZP→atmosphere [kg/s] given the inside-outside pressure difference at
/// the apex.
pub fn poppet_flow(rho_zp: f64, dp_apex: f64, spec: &TransferDeviceSpec) -> f64 {
    orifice_flow(spec.poppet_cd, spec.poppet_d, rho_zp, dp_apex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferAction {
    PumpOn,
    PumpOff,
    VentOpen,
    VentClose,
    PoppetOpen,
}

impl TransferAction {
    pub const ALL: [TransferAction; 5] = [
        TransferAction::PumpOn,
        TransferAction::PumpOff,
        TransferAction::VentOpen,
        TransferAction::VentClose,
        TransferAction::PoppetOpen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransferAction::PumpOn => "pump_on",
            TransferAction::PumpOff => "pump_off",
            TransferAction::VentOpen => "vent_open",
            TransferAction::VentClose => "vent_close",
            TransferAction::PoppetOpen => "poppet_open",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCommand {
    pub t: f64,
    pub action: TransferAction,
}

/// Time-ordered command list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Timeline {
    commands: Vec<TransferCommand>,
}

impl Timeline {
    pub fn new(commands: Vec<TransferCommand>) -> Result<Self, TransferError> {
        for (i, c) in commands.iter().enumerate() {
            if !(c.t >= 0.0 && c.t.is_finite()) {
                return Err(TransferError::Timeline(format!(
                    "command {} has invalid time {}",
                    i + 1,
                    c.t
                )));
            }
        }
        if commands.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(TransferError::Timeline("commands must be time-ordered".into()));
        }
        Ok(Self { commands })
    }

    pub fn commands(&self) -> &[TransferCommand] {
        &self.commands
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    /// Parses `t_s,action` rows.
    pub fn parse_csv(text: &str) -> Result<Self, TransferError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr
            .headers()
            .map_err(|e| TransferError::Timeline(e.to_string()))?
            .clone();
        if header.iter().collect::<Vec<_>>() != ["t_s", "action"] {
            return Err(TransferError::Timeline(
                "expected header 't_s,action'".into(),
            ));
        }
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| TransferError::Timeline(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let t: f64 = rec[0].parse().map_err(|_| {
                TransferError::Timeline(format!("row {line}: bad time '{}'", &rec[0]))
            })?;
            let action = TransferAction::parse(&rec[1]).ok_or_else(|| {
                TransferError::Timeline(format!("row {line}: unknown action '{}'", &rec[1]))
            })?;
            out.push(TransferCommand { t, action });
        }
        Self::new(out)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_s,action\n");
        for c in &self.commands {
            s.push_str(&format!("{},{}\n", c.t, c.action.as_str()));
        }
        s
    }
}

/// Helium inventory [kg].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeliumLedger {
    pub m_sp: f64,
    pub m_zp: f64,
    pub m_lost: f64,
}

impl HeliumLedger {
    pub fn total(&self) -> f64 {
        self.m_sp + self.m_zp + self.m_lost
    }
}

/// Which chamber hit its floor during a transfer step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampEvent {
    Sp,
    Zp,
}

/// Flows actually applied after clamping [kg/s].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedFlows {
    pub pump: f64,
    pub vent: f64,
    pub poppet: f64,
}

/// Advances the ledger over `dt`. Outflows are throttled so neither chamber drops
/// below its floor mass (`floors` = (SP, ZP), typically 1% of the initial fill).
pub fn apply_transfer(
    state: HeliumLedger,
    mdot_pump: f64,
    mdot_vent: f64,
    mdot_poppet: f64,
    dt: f64,
    floors: (f64, f64),
) -> Result<(HeliumLedger, AppliedFlows, Option<ClampEvent>), TransferError> {
    if !(dt > 0.0) {
        return Err(TransferError::Domain(format!("dt must be positive, got {dt}")));
    }
    if !(mdot_pump >= 0.0 && mdot_vent >= 0.0 && mdot_poppet >= 0.0) {
        return Err(TransferError::Domain("flows must be non-negative".into()));
    }
    let (mut pump, mut vent, mut poppet) = (mdot_pump, mdot_vent, mdot_poppet);
    let mut event = None;
    // SP loses mass only through the vent.
    if state.m_sp + (pump - vent) * dt < floors.0 {
        vent = ((state.m_sp - floors.0) / dt + pump).max(0.0);
        event = Some(ClampEvent::Sp);
    }
    let zp_out = pump + poppet;
    if zp_out > 0.0 && state.m_zp + (vent - zp_out) * dt < floors.1 {
        let allowed = ((state.m_zp - floors.1) / dt + vent).max(0.0);
        let k = (allowed / zp_out).min(1.0);
        pump *= k;
        poppet *= k;
        event = Some(ClampEvent::Zp);
    }
    let to_sp = (pump - vent) * dt;
    let lost = poppet * dt;
    Ok((
        HeliumLedger {
            m_sp: state.m_sp + to_sp,
            m_zp: state.m_zp - to_sp - lost,
            m_lost: state.m_lost + lost,
        },
        AppliedFlows { pump, vent, poppet },
        event,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dev() -> TransferDeviceSpec {
        TransferDeviceSpec {
            pump_vdot: 1.667e-4,
            vent_cd: 0.6,
            vent_d: 0.007,
            poppet_cd: 0.6,
            poppet_d: 0.095,
        }
    }

    #[test]
    fn pump_examples() {
        let d = dev();
        assert!((pump_flow(0.16, &d, true) - 2.6672e-5).abs() < 1e-12);
        assert_eq!(pump_flow(0.16, &d, false), 0.0);
        assert_eq!(pump_flow(0.32, &d, true), 2.0 * pump_flow(0.16, &d, true));
    }

    #[test]
    fn vent_examples() {
        let d = dev();
        assert_eq!(vent_flow(1.0, 1e5, 1e5, &d), 0.0);
        assert_eq!(vent_flow(1.0, 1e5, 1.1e5, &d), 0.0);
        let expect = 0.6 * std::f64::consts::FRAC_PI_4 * 4.9e-5 * (2e4f64).sqrt();
        let m = vent_flow(1.0, 1.1e5, 1e5, &d);
        assert!((m - expect).abs() < 1e-15);
        assert!((m - 3.27e-3).abs() < 5e-6);
        let m4 = vent_flow(1.0, 1.4e5, 1e5, &d);
        assert!((m4 / m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_flows_leave_state_unchanged() {
        let s = HeliumLedger { m_sp: 1.2, m_zp: 3.0, m_lost: 0.0 };
        let (n, _, e) = apply_transfer(s, 1e-4, 1e-4, 0.0, 1.0, (0.012, 0.03)).unwrap();
        assert_eq!(n, s);
        assert!(e.is_none());
    }

    #[test]
    fn pump_only_conserves() {
        let s = HeliumLedger { m_sp: 1.2, m_zp: 3.0, m_lost: 0.0 };
        let (n, _, _) = apply_transfer(s, 2.667e-5, 0.0, 0.0, 10.0, (0.0, 0.0)).unwrap();
        assert!((n.m_sp - s.m_sp - 2.667e-4).abs() < 1e-15);
        assert!((s.m_zp - n.m_zp - 2.667e-4).abs() < 1e-15);
        assert!((n.total() - s.total()).abs() <= 1e-12 * s.total());
    }

    #[test]
    fn poppet_loses_mass_to_ledger() {
        let s = HeliumLedger { m_sp: 1.2, m_zp: 3.0, m_lost: 0.0 };
        let (n, _, _) = apply_transfer(s, 0.0, 0.0, 1e-3, 1.0, (0.0, 0.0)).unwrap();
        assert!(n.m_sp + n.m_zp < s.m_sp + s.m_zp);
        assert!((n.m_lost - 1e-3).abs() < 1e-18);
        assert!((n.total() - s.total()).abs() < 1e-15);
    }

    #[test]
    fn floors_are_respected() {
        let s = HeliumLedger { m_sp: 0.02, m_zp: 3.0, m_lost: 0.0 };
        let (n, f, e) = apply_transfer(s, 0.0, 1.0, 0.0, 1.0, (0.012, 0.03)).unwrap();
        assert_eq!(e, Some(ClampEvent::Sp));
        assert!((n.m_sp - 0.012).abs() < 1e-15);
        assert!(f.vent < 1.0);
        assert!(apply_transfer(s, 0.0, 0.0, 0.0, 0.0, (0.0, 0.0)).is_err());
    }

    #[test]
    fn long_run_conservation() {
        let mut s = HeliumLedger { m_sp: 1.19, m_zp: 3.3, m_lost: 0.0 };
        let m0 = s.m_sp + s.m_zp;
        for i in 0..100_000 {
            let (p, v) = if i % 3 == 0 { (2.7e-5, 0.0) } else { (0.0, 1.3e-5) };
            s = apply_transfer(s, p, v, 0.0, 0.5, (0.0119, 0.033)).unwrap().0;
        }
        assert!(((s.m_sp + s.m_zp - m0) / m0).abs() < 1e-9);
    }

    #[test]
    fn timeline_round_trip() {
        let t = Timeline::parse_csv("t_s,action\n10,vent_open\n70.5,vent_close\n").unwrap();
        assert_eq!(t.commands().len(), 2);
        assert_eq!(Timeline::parse_csv(&t.to_csv()).unwrap(), t);
        assert!(Timeline::parse_csv("t_s,action\n10,launch\n").is_err());
        assert!(Timeline::parse_csv("t_s,action\n10,vent_open\n5,vent_close\n").is_err());
    }
}
