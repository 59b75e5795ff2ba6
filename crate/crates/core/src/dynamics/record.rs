//! Trajectory snapshots and their CSV form.

use std::fmt::Write as _;

pub const TRAJECTORY_HEADER: &str = "t_s,east_m,north_m,alt_m,vz_ms,m_sp_kg,m_zp_kg,p_sp_pa,p_zp_pa,t_sp_k,t_zp_k,t1_k,t2_k,t3_k,t4_k,v_zp_m3,mode,event";

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub east: f64,
    pub north: f64,
    pub alt: f64,
    pub vz: f64,
    pub m_sp: f64,
    pub m_zp: f64,
    pub p_sp: f64,
    pub p_zp: f64,
    pub t_sp: f64,
    pub t_zp: f64,
    pub t_nodes: [f64; 4],
    /// Total displaced volume, SP included [m³].
    pub v_zp: f64,
    pub mode: String,
    /// Events logged during the step that ended at `t`, `;`-separated.
    pub event: String,
    // Not part of trajectory.csv; used for ground tracks.
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    /// Why the run stopped early, if it did.
    pub fault: Option<String>,
}

impl TrajectoryRecord {
    pub fn last(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(160 * (self.rows.len() + 1));
        s.push_str(TRAJECTORY_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.east,
                r.north,
                r.alt,
                r.vz,
                r.m_sp,
                r.m_zp,
                r.p_sp,
                r.p_zp,
                r.t_sp,
                r.t_zp,
                r.t_nodes[0],
                r.t_nodes[1],
                r.t_nodes[2],
                r.t_nodes[3],
                r.v_zp,
                r.mode,
                r.event
            );
        }
        s
    }
}
