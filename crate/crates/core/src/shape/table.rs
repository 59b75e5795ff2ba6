//! Precomputed shape summaries over (buoyancy density, fill fraction), with bilinear
//! lookup for the flight engine.

use super::solver::{ShapeFamily, ShapeFlag, ShapeSummary, SolveOptions};
use super::{EnvelopeSpec, ShapeError, ShapeLoad};
use rayon::prelude::*;
use std::fmt::Write as _;

pub const MIN_AXIS_POINTS: usize = 4;
/// Largest tolerated share of unsolved cells.
pub const MAX_INFEASIBLE_SHARE: f64 = 0.05;

/// Axes of a shape table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGrid {
    pub rho_diff: Vec<f64>,
    pub fill: Vec<f64>,
}

impl TableGrid {
    pub fn new(rho_diff: Vec<f64>, fill: Vec<f64>) -> Result<Self, ShapeError> {
        for (name, axis) in [("rho_diff", &rho_diff), ("fill", &fill)] {
            if axis.len() < MIN_AXIS_POINTS {
                return Err(ShapeError::Grid(format!(
                    "{name} axis needs at least {MIN_AXIS_POINTS} points, got {}",
                    axis.len()
                )));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(ShapeError::Grid(format!("{name} axis must be strictly increasing")));
            }
        }
        if !(rho_diff[0] > 0.0) {
            return Err(ShapeError::Grid("rho_diff axis must be positive".into()));
        }
        if !(fill[0] >= 0.0 && fill[fill.len() - 1] <= 1.0) {
            return Err(ShapeError::Grid("fill axis must lie within [0, 1]".into()));
        }
        Ok(Self { rho_diff, fill })
    }

    /// `n_rho` log-spaced densities over `[rho_lo, rho_hi]` and `n_fill` linear fill
    /// fractions over `[0.02, 1]`.
    pub fn spanning(rho_lo: f64, rho_hi: f64, n_rho: usize, n_fill: usize) -> Result<Self, ShapeError> {
        if n_rho < 2 || n_fill < 2 {
            return Self::new(vec![rho_lo; n_rho], vec![0.0; n_fill]);
        }
        let (la, lb) = (rho_lo.ln(), rho_hi.ln());
        let rho = (0..n_rho)
            .map(|i| (la + (lb - la) * i as f64 / (n_rho - 1) as f64).exp())
            .collect();
        let fill = (0..n_fill)
            .map(|j| 0.02 + 0.98 * j as f64 / (n_fill - 1) as f64)
            .collect();
        Self::new(rho, fill)
    }

    pub fn default_for(rho_lo: f64, rho_hi: f64) -> Result<Self, ShapeError> {
        Self::spanning(rho_lo, rho_hi, 16, 32)
    }
}

/// Loads used for every table cell. The zero-pressure helium density follows the
/// buoyancy density through the molar-mass ratio `helium_ratio = M_He / M_atm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableLoad {
    pub m_payload: f64,
    pub m_sp_gas: f64,
    pub gravity: f64,
    pub helium_ratio: f64,
}

impl TableLoad {
    pub fn at(&self, rho_diff: f64) -> ShapeLoad {
        let k = self.helium_ratio;
        ShapeLoad {
            m_payload: self.m_payload,
            m_sp_gas: self.m_sp_gas,
            rho_zp: rho_diff * k / (1.0 - k),
            gravity: self.gravity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTable {
    pub grid: TableGrid,
    v_sp: f64,
    v_full: f64,
    /// Row-major over (rho_diff, fill); `None` marks an unsolved cell.
    cells: Vec<Option<ShapeSummary>>,
}

const CSV_HEADER: &str =
    "rho_diff,fill_frac,volume_m3,a_top_m2,a_side_m2,beta_rad,z_p0_m,tension_n,flag";

impl ShapeTable {
    /// Solves every cell, keeping unsolved cells as gaps.
    pub fn build(spec: &EnvelopeSpec, grid: TableGrid, load: TableLoad) -> Self {
        let opts = SolveOptions {
            mid_samples: 200,
            section_samples: 120,
        };
        let rows: Vec<Vec<Option<ShapeSummary>>> = grid
            .rho_diff
            .par_iter()
            .map(|&rho| {
                let family = ShapeFamily::trace(spec, load.at(rho), rho).ok();
                grid.fill
                    .iter()
                    .map(|&f| {
                        let fam = family.as_ref()?;
                        fam.solve(spec.volume_at_fill(f), &opts).ok().map(|s| s.summary)
                    })
                    .collect()
            })
            .collect();
        Self {
            v_sp: spec.sp_volume(),
            v_full: spec.inflated_volume(),
            grid,
            cells: rows.into_iter().flatten().collect(),
        }
    }

    pub fn cell(&self, i_rho: usize, j_fill: usize) -> Option<&ShapeSummary> {
        self.cells[i_rho * self.grid.fill.len() + j_fill].as_ref()
    }

    pub fn infeasible_cells(&self) -> Vec<(usize, usize)> {
        let nf = self.grid.fill.len();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(k, _)| (k / nf, k % nf))
            .collect()
    }

    pub fn fill_fraction(&self, volume: f64) -> f64 {
        (volume - self.v_sp) / (self.v_full - self.v_sp)
    }

    pub fn full_volume(&self) -> f64 {
        self.v_full
    }

    pub fn sp_volume(&self) -> f64 {
        self.v_sp
    }

    /// Bilinear interpolation at (`rho_diff`, `volume`), clamped to the table. Unsolved
    /// corners are skipped and the remaining weights renormalised.
    pub fn lookup(&self, rho_diff: f64, volume: f64) -> ShapeSummary {
        let (i, u) = locate(&self.grid.rho_diff, rho_diff);
        let (j, v) = locate(&self.grid.fill, self.fill_fraction(volume));
        let corners = [
            (i, j, (1.0 - u) * (1.0 - v)),
            (i + 1, j, u * (1.0 - v)),
            (i, j + 1, (1.0 - u) * v),
            (i + 1, j + 1, u * v),
        ];
        let mut acc = Acc::default();
        let mut nearest: Option<(f64, ShapeFlag)> = None;
        for (a, b, wt) in corners {
            if let Some(c) = self.cell(a, b) {
                acc.add(c, wt);
                if nearest.is_none_or(|(w0, _)| wt > w0) {
                    nearest = Some((wt, c.flag));
                }
            }
        }
        let mut out = if acc.weight > 0.0 {
            acc.finish(nearest.map_or(ShapeFlag::Converged, |n| n.1))
        } else {
            *self.nearest_cell(i, j).expect("table has at least one solved cell")
        };
        out.volume = volume;
        out
    }

    fn nearest_cell(&self, i: usize, j: usize) -> Option<&ShapeSummary> {
        let nf = self.grid.fill.len();
        (0..self.cells.len())
            .filter(|k| self.cells[*k].is_some())
            .min_by_key(|k| {
                let (a, b) = ((k / nf) as i64 - i as i64, (k % nf) as i64 - j as i64);
                a * a + b * b
            })
            .and_then(|k| self.cells[k].as_ref())
    }

    /// Writes the documented CSV artifact, one row per cell, rho-major.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() * 120);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for (i, rho) in self.grid.rho_diff.iter().enumerate() {
            for (j, fill) in self.grid.fill.iter().enumerate() {
                match self.cell(i, j) {
                    Some(c) => writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{}",
                        rho,
                        fill,
                        c.volume,
                        c.a_top,
                        c.a_side,
                        c.beta,
                        c.z_p0,
                        c.tension,
                        c.flag.as_str()
                    ),
                    None => writeln!(s, "{rho},{fill},,,,,,,infeasible"),
                }
                .expect("writing to a String cannot fail");
            }
        }
        s
    }
}

/// Builds a table and rejects it when more than 5% of the cells are unsolved.
pub fn build_shape_table(
    spec: &EnvelopeSpec,
    grid: TableGrid,
    load: TableLoad,
) -> Result<ShapeTable, ShapeError> {
    let table = ShapeTable::build(spec, grid, load);
    let bad = table.infeasible_cells();
    let total = table.cells.len();
    if bad.len() as f64 > MAX_INFEASIBLE_SHARE * total as f64 || bad.len() == total {
        return Err(ShapeError::TableInfeasible { cells: bad, total });
    }
    Ok(table)
}

/// Lower knot index and fractional position, clamped to the axis.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    if x <= axis[0] {
        return (0, 0.0);
    }
    if x >= axis[n - 1] {
        return (n - 2, 1.0);
    }
    let i = axis.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

#[derive(Default)]
struct Acc {
    weight: f64,
    v: [f64; 14],
}

impl Acc {
    fn fields(c: &ShapeSummary) -> [f64; 14] {
        [
            c.volume,
            c.a_top,
            c.a_side,
            c.beta,
            c.z_p0,
            c.tension,
            c.s0,
            c.s_l,
            c.node_areas[0],
            c.node_areas[1],
            c.node_areas[2],
            c.node_areas[3],
            c.bubble_diameter,
            c.height,
        ]
    }

    fn add(&mut self, c: &ShapeSummary, w: f64) {
        self.weight += w;
        for (a, f) in self.v.iter_mut().zip(Self::fields(c)) {
            *a += w * f;
        }
    }

    fn finish(&self, flag: ShapeFlag) -> ShapeSummary {
        let f: Vec<f64> = self.v.iter().map(|x| x / self.weight).collect();
        ShapeSummary {
            volume: f[0],
            a_top: f[1],
            a_side: f[2],
            beta: f[3],
            z_p0: f[4],
            tension: f[5],
            s0: f[6],
            s_l: f[7],
            node_areas: [f[8], f[9], f[10], f[11]],
            bubble_diameter: f[12],
            height: f[13],
            flag,
        }
    }
}
