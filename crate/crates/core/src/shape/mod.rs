//! Axisymmetric equilibrium shape of the zero-pressure envelope around the nested
//! superpressure sphere.
//!
//! The meridian has three parts: a base where the film lies on the SP sphere up to
//! polar angle `beta`, a free mid-section obeying the natural-shape equations, and
//! an apex that keeps its as-fabricated (fully inflated) form.

mod envelope;
mod rhs;
mod solver;
mod table;

pub use envelope::{CurvePoint, EnvelopeSpec, InflatedCurve};
pub use rhs::{base_buoyancy, initial_tension, shape_rhs, MeridianState, ShapeLoad, ShapeParams};
pub use solver::{
    degenerate, solve_shape, FamilyNode, ShapeCurve, ShapeFamily, ShapeFlag, ShapeSolution,
    ShapeSummary, SolveOptions, VolumeRequest,
};
pub use table::{build_shape_table, ShapeTable, TableGrid, TableLoad, MAX_INFEASIBLE_SHARE, MIN_AXIS_POINTS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("invalid envelope specification: {0}")]
    InvalidSpec(String),
    #[error("meridian singular (r = {r}, q = {q})")]
    Singular { r: f64, q: f64 },
    #[error("payload too light for a taut base: film tension {tension} N")]
    SlackBase { tension: f64 },
    #[error("volume {volume} m³ outside the feasible range [{min}, {max}] m³")]
    Infeasible { volume: f64, min: f64, max: f64 },
    #[error("shape solver did not converge (residuals {residual:?}): {message}")]
    NoConvergence { residual: [f64; 2], message: String },
    #[error("shape table grid: {0}")]
    Grid(String),
    #[error("{} of {total} shape table cells infeasible: {cells:?}", cells.len())]
    TableInfeasible {
        cells: Vec<(usize, usize)>,
        total: usize,
    },
}
