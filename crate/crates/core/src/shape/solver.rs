//! Boundary-value solver for the free mid-section of the zero-pressure film.
//!
//! For a fixed attachment arclength `s_l`, the unknowns `(beta, z_p0)` are found by
//! single shooting with a damped Newton iteration on the two terminal conditions
//! (tangent angle and radius meet the inflated curve). Because simulation queries
//! are by volume, the solutions are traced as a one-parameter family in `s_l` and
//! the requested volume is located along that family.

use super::rhs::{shape_rhs, tension_unchecked, MeridianState, ShapeLoad, ShapeParams};
use super::{EnvelopeSpec, ShapeError};
use crate::ode::{brent, dopri5, AdaptiveOptions};
use nalgebra::{Matrix2, Vector2};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::ops::Range;

/// Convergence target on the terminal residuals (rad and m).
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 40;
const FD_REL_STEP: f64 = 1e-6;
const BETA_MIN: f64 = 1e-6;
/// Stop tracing toward the top apex once the attachment radius drops below this
/// fraction of the largest envelope radius.
const TOP_RADIUS_FRACTION: f64 = 0.05;
const DEFAULT_MID_SAMPLES: usize = 400;

fn ode_options() -> AdaptiveOptions {
    AdaptiveOptions {
        rtol: 1e-11,
        atol: 1e-13,
        h_init: 1e-3,
        h_max: 0.25,
        max_steps: 100_000,
    }
}

/// How a shape was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeFlag {
    /// Mid-section boundary-value problem converged.
    Converged,
    /// Envelope at (or within solver reach of) full inflation.
    FullInflation,
    /// Gas too scarce for a taut mid-section: analytic bubble-on-tendon shape.
    Degenerate,
}

impl ShapeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ShapeFlag::Converged => "ok",
            ShapeFlag::FullInflation => "full",
            ShapeFlag::Degenerate => "degenerate",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(ShapeFlag::Converged),
            "full" => Some(ShapeFlag::FullInflation),
            "degenerate" => Some(ShapeFlag::Degenerate),
            _ => None,
        }
    }
}

/// Scalar products of a shape solve, cheap to store and interpolate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSummary {
    /// Total volume enclosed by the zero-pressure film, SP included [m³].
    pub volume: f64,
    pub a_top: f64,
    pub a_side: f64,
    pub beta: f64,
    pub z_p0: f64,
    /// Vertical film tension at the separation point [N].
    pub tension: f64,
    pub s0: f64,
    pub s_l: f64,
    /// Thermal node areas: SP contact cap, free SP surface, ZP side, ZP top [m²].
    pub node_areas: [f64; 4],
    /// Largest diameter of the free zero-pressure film [m].
    pub bubble_diameter: f64,
    /// Overall envelope height [m].
    pub height: f64,
    pub flag: ShapeFlag,
}

/// Sampled meridian of a solution. `q` covers only the mid-section indices `mid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCurve {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub mid: Range<usize>,
    pub q: Vec<f64>,
}

impl ShapeCurve {
    /// Meridional stress 1/(q r) over the mid-section [N/m].
    pub fn sigma_m(&self) -> Vec<f64> {
        self.mid
            .clone()
            .zip(&self.q)
            .map(|(i, q)| 1.0 / (q * self.r[i]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSolution {
    pub summary: ShapeSummary,
    pub rho_diff: f64,
    /// Terminal residuals (theta, r) of the mid-section; zero for analytic shapes.
    pub residuals: [f64; 2],
    pub curve: ShapeCurve,
}

/// What the caller wants enclosed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeRequest {
    /// Total enclosed volume, SP included [m³].
    Total(f64),
    /// Zero-pressure helium state; its ideal-gas volume is added to the SP volume.
    Gas {
        mass: f64,
        temperature: f64,
        pressure: f64,
    },
}

impl VolumeRequest {
    pub fn total_volume(self, spec: &EnvelopeSpec) -> f64 {
        match self {
            VolumeRequest::Total(v) => v,
            VolumeRequest::Gas {
                mass,
                temperature,
                pressure,
            } => spec.sp_volume() + mass * crate::constants::HELIUM_R * temperature / pressure,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Points used to sample the mid-section of the returned curve.
    pub mid_samples: usize,
    /// Points used for the base and apex sections of the returned curve.
    pub section_samples: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mid_samples: DEFAULT_MID_SAMPLES,
            section_samples: 200,
        }
    }
}

impl SolveOptions {
    /// Fine sampling for oracle checks on the returned curve.
    pub fn fine() -> Self {
        Self {
            mid_samples: 4001,
            section_samples: 4001,
        }
    }
}

struct Ctx<'a> {
    spec: &'a EnvelopeSpec,
    load: ShapeLoad,
    rho_diff: f64,
    params_w: f64,
    b: f64,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a EnvelopeSpec, load: ShapeLoad, rho_diff: f64) -> Self {
        Self {
            spec,
            load,
            rho_diff,
            params_w: spec.areal_mass_zp * load.gravity,
            b: load.gravity * rho_diff,
        }
    }

    fn start(&self, beta: f64, z_p0: f64) -> Option<(f64, [f64; 5], f64)> {
        let r = self.spec.r_sp;
        let f = tension_unchecked(self.spec, &self.load, self.rho_diff, beta, z_p0);
        if !(f > 0.0) {
            return None;
        }
        let y0 = [
            FRAC_PI_2 - beta,
            2.0 * PI * beta.sin() / f,
            r * beta.sin(),
            r * (1.0 - beta.cos()),
            0.0,
        ];
        Some((r * beta, y0, f))
    }

    /// Integrates the mid-section to `s_l`; state is (theta, q, r, z, volume).
    /// With `samples` > 1 also returns the state at that many equally spaced points.
    fn integrate(
        &self,
        beta: f64,
        z_p0: f64,
        s_l: f64,
        samples: usize,
    ) -> Option<([f64; 5], Vec<(f64, [f64; 5])>)> {
        let (s0, y0, _) = self.start(beta, z_p0)?;
        if !(s_l > s0) {
            return None;
        }
        let p = ShapeParams {
            w: self.params_w,
            b: self.b,
            head_offset: -z_p0,
        };
        let mut f = |_s: f64, y: &[f64], dy: &mut [f64]| -> Result<(), ShapeError> {
            let d = shape_rhs(
                MeridianState {
                    theta: y[0],
                    q: y[1],
                    r: y[2],
                    z: y[3],
                },
                p,
            )?;
            dy[0] = d.theta;
            dy[1] = d.q;
            dy[2] = d.r;
            dy[3] = d.z;
            dy[4] = PI * y[2] * y[2] * y[0].cos();
            Ok(())
        };
        let opts = ode_options();
        if samples < 2 {
            let tr = dopri5(&mut f, s0, &y0, s_l, &opts).ok()?;
            let y = tr.last();
            let end = [y[0], y[1], y[2], y[3], y[4]];
            return end.iter().all(|v| v.is_finite()).then_some((end, Vec::new()));
        }
        let mut out = Vec::with_capacity(samples);
        out.push((s0, y0));
        let mut y = y0.to_vec();
        for i in 1..samples {
            let a = s0 + (s_l - s0) * (i - 1) as f64 / (samples - 1) as f64;
            let b = s0 + (s_l - s0) * i as f64 / (samples - 1) as f64;
            let tr = dopri5(&mut f, a, &y, b, &opts).ok()?;
            y = tr.last().to_vec();
            out.push((b, [y[0], y[1], y[2], y[3], y[4]]));
        }
        let end = out[out.len() - 1].1;
        Some((end, out))
    }

    fn residual(&self, x: [f64; 2], s_l: f64) -> Option<(Vector2<f64>, [f64; 5])> {
        if !(x[0] > BETA_MIN && x[0] < PI - BETA_MIN) {
            return None;
        }
        let (end, _) = self.integrate(x[0], x[1], s_l, 0)?;
        let target = self.spec.zp_curve.eval(s_l);
        Some((
            Vector2::new(end[0] - target.theta, end[2] - target.r),
            end,
        ))
    }

    /// Damped Newton on (beta, z_p0) at fixed `s_l`.
    fn newton(&self, x0: [f64; 2], s_l: f64) -> Option<([f64; 2], Vector2<f64>, [f64; 5])> {
        let height = self.spec.zp_curve.height();
        let mut x = Vector2::new(x0[0], x0[1]);
        let (mut f, mut end) = self.residual([x[0], x[1]], s_l)?;
        for _ in 0..NEWTON_MAX_ITER {
            let norm = f.amax();
            if norm < NEWTON_TOL {
                return Some(([x[0], x[1]], f, end));
            }
            let mut jac = Matrix2::zeros();
            for j in 0..2 {
                let h = FD_REL_STEP * x[j].abs().max(1.0);
                let mut xp = x;
                xp[j] += h;
                let (fp, _) = self.residual([xp[0], xp[1]], s_l)?;
                jac.set_column(j, &((fp - f) / h));
            }
            let mut dx = jac.lu().solve(&(-f))?;
            let scale = (dx[0].abs() / 0.3).max(dx[1].abs() / (0.25 * height)).max(1.0);
            dx /= scale;
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-4 {
                let xt = x + dx * lambda;
                if let Some((ft, et)) = self.residual([xt[0], xt[1]], s_l) {
                    if ft.amax() < (1.0 - 1e-4 * lambda) * norm {
                        x = xt;
                        f = ft;
                        end = et;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        (f.amax() < NEWTON_TOL).then_some(([x[0], x[1]], f, end))
    }

    fn total_volume(&self, beta: f64, s_l: f64, end: &[f64; 5]) -> f64 {
        let r = self.spec.r_sp;
        let h = r * (1.0 - beta.cos());
        PI * h * h * (3.0 * r - h) / 3.0 + end[4] + self.spec.zp_curve.cap_volume(s_l)
    }

    /// Coarse grid scan followed by Newton from the most promising seeds.
    fn find_start(&self, s_l: f64) -> Option<[f64; 2]> {
        let height = self.spec.zp_curve.height();
        let n = 24;
        let mut seeds: Vec<(f64, [f64; 2])> = Vec::new();
        for i in 0..n {
            let beta = 0.05 + (PI - 0.1) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let zp0 = -0.2 * height + 1.4 * height * j as f64 / (n - 1) as f64;
                if let Some((f, _)) = self.residual([beta, zp0], s_l) {
                    seeds.push((f.amax(), [beta, zp0]));
                }
            }
        }
        seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        seeds
            .iter()
            .take(8)
            .find_map(|(_, x)| self.newton(*x, s_l).map(|(x, _, _)| x))
    }
}

/// A traced node of the solution family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyNode {
    pub s_l: f64,
    pub beta: f64,
    pub z_p0: f64,
    pub volume: f64,
}

/// Equilibrium shapes at one buoyancy gradient, traced along the attachment arclength.
#[derive(Debug, Clone)]
pub struct ShapeFamily<'a> {
    spec: &'a EnvelopeSpec,
    load: ShapeLoad,
    rho_diff: f64,
    /// Nodes sorted by increasing `s_l`.
    nodes: Vec<FamilyNode>,
}

impl<'a> ShapeFamily<'a> {
    /// Traces the family. An empty family (no taut mid-section anywhere) is allowed;
    /// every query then falls back to analytic shapes.
    pub fn trace(
        spec: &'a EnvelopeSpec,
        load: ShapeLoad,
        rho_diff: f64,
    ) -> Result<Self, ShapeError> {
        if !(rho_diff > 0.0) {
            return Err(ShapeError::InvalidSpec("rho_diff must be positive".into()));
        }
        let ctx = Ctx::new(spec, load, rho_diff);
        let curve = &spec.zp_curve;
        let st = curve.s_total();
        let rmax = curve.max_radius();
        let top_limit = {
            // Largest s at which the attachment radius is still above the cutoff.
            let f = |s: f64| Some(curve.eval(s).r - TOP_RADIUS_FRACTION * rmax);
            let s_peak = (0..=400)
                .map(|i| st * i as f64 / 400.0)
                .max_by(|a, b| curve.eval(*a).r.total_cmp(&curve.eval(*b).r))
                .unwrap_or(0.5 * st);
            brent(f, s_peak, st, 1e-10, 200).unwrap_or(st)
        };
        let lower = spec.r_sp * 1e-3;

        let mut start = None;
        for frac in [0.6, 0.75, 0.45, 0.9, 0.3, 0.95, 0.2] {
            let s = lower + frac * (top_limit - lower);
            if let Some(x) = ctx.find_start(s) {
                start = Some((s, x));
                break;
            }
        }
        let Some((s_start, x_start)) = start else {
            return Ok(Self {
                spec,
                load,
                rho_diff,
                nodes: Vec::new(),
            });
        };
        let node = |s: f64, x: [f64; 2]| -> Option<FamilyNode> {
            let (end, _) = ctx.integrate(x[0], x[1], s, 0)?;
            Some(FamilyNode {
                s_l: s,
                beta: x[0],
                z_p0: x[1],
                volume: ctx.total_volume(x[0], s, &end),
            })
        };
        let first = node(s_start, x_start).ok_or_else(|| ShapeError::NoConvergence {
            residual: [f64::NAN; 2],
            message: "start node failed to re-integrate".into(),
        })?;

        let h0 = 0.02 * st;
        let mut up = vec![first];
        let mut down = vec![first];
        for (dir, branch) in [(1.0, &mut up), (-1.0, &mut down)] {
            let mut h = h0;
            loop {
                let cur = branch[branch.len() - 1];
                let mut s_next = cur.s_l + dir * h;
                if dir > 0.0 && s_next > top_limit {
                    s_next = top_limit;
                }
                if dir > 0.0 && cur.s_l >= top_limit {
                    break;
                }
                if dir < 0.0 && s_next <= spec.r_sp * cur.beta + 1e-6 {
                    s_next = 0.5 * (cur.s_l + spec.r_sp * cur.beta);
                    if cur.s_l - spec.r_sp * cur.beta < 1e-5 {
                        break;
                    }
                }
                let guess = if branch.len() >= 2 {
                    let prev = branch[branch.len() - 2];
                    let u = (s_next - cur.s_l) / (cur.s_l - prev.s_l);
                    [
                        cur.beta + u * (cur.beta - prev.beta),
                        cur.z_p0 + u * (cur.z_p0 - prev.z_p0),
                    ]
                } else {
                    [cur.beta, cur.z_p0]
                };
                let solved = ctx
                    .newton(guess, s_next)
                    .or_else(|| ctx.newton([cur.beta, cur.z_p0], s_next))
                    .and_then(|(x, _, _)| node(s_next, x));
                match solved {
                    Some(n) => {
                        branch.push(n);
                        h = (h * 1.5).min(4.0 * h0);
                    }
                    None => {
                        h *= 0.5;
                        if h < 1e-5 {
                            break;
                        }
                    }
                }
            }
        }
        down.reverse();
        down.pop();
        down.extend(up);
        Ok(Self {
            spec,
            load,
            rho_diff,
            nodes: down,
        })
    }

    pub fn nodes(&self) -> &[FamilyNode] {
        &self.nodes
    }

    pub fn rho_diff(&self) -> f64 {
        self.rho_diff
    }

    /// Volume range covered by converged mid-section solutions.
    pub fn volume_range(&self) -> Option<(f64, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let lo = self.nodes.iter().map(|n| n.volume).fold(f64::INFINITY, f64::min);
        let hi = self
            .nodes
            .iter()
            .map(|n| n.volume)
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Shape enclosing `v_target` (total volume, SP included).
    pub fn solve(&self, v_target: f64, opts: &SolveOptions) -> Result<ShapeSolution, ShapeError> {
        let spec = self.spec;
        let v_sp = spec.sp_volume();
        let v_full = spec.inflated_volume();
        let tol = 1e-9 * v_full;
        if !(v_target >= v_sp - tol && v_target <= v_full + tol) {
            return Err(ShapeError::Infeasible {
                volume: v_target,
                min: v_sp,
                max: v_full,
            });
        }
        let ctx = Ctx::new(spec, self.load, self.rho_diff);

        let mut best: Option<(f64, f64, [f64; 2])> = None;
        for w in self.nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ga, gb) = (a.volume - v_target, b.volume - v_target);
            if ga.signum() == gb.signum() && ga != 0.0 && gb != 0.0 {
                continue;
            }
            let interp = |s: f64| {
                let u = (s - a.s_l) / (b.s_l - a.s_l);
                [a.beta + u * (b.beta - a.beta), a.z_p0 + u * (b.z_p0 - a.z_p0)]
            };
            let mut last_x = [a.beta, a.z_p0];
            let mut g = |s: f64| -> Option<f64> {
                let (x, _, end) = ctx
                    .newton(interp(s), s)
                    .or_else(|| ctx.newton(last_x, s))?;
                last_x = x;
                Some(ctx.total_volume(x[0], s, &end) - v_target)
            };
            let Some(s_root) = brent(&mut g, a.s_l, b.s_l, 1e-12, 100) else {
                continue;
            };
            let Some((x, _, end)) = ctx.newton(interp(s_root), s_root) else {
                continue;
            };
            let v = ctx.total_volume(x[0], s_root, &end);
            if ((v - v_target) / v_target).abs() > 1e-6 {
                continue;
            }
            if best.is_none_or(|(bb, _, _)| x[0] < bb) {
                best = Some((x[0], s_root, x));
            }
        }
        if let Some((_, s_l, x)) = best {
            return self.build(&ctx, s_l, x, ShapeFlag::Converged, opts);
        }
        match self.volume_range() {
            Some((_, hi)) if v_target >= hi => self.full_inflation(&ctx, opts),
            Some((lo, _)) if v_target > lo => Err(ShapeError::NoConvergence {
                residual: [f64::NAN; 2],
                message: format!("no family member encloses {v_target} m³"),
            }),
            _ if v_target >= v_full - tol => self.full_inflation(&ctx, opts),
            _ => degenerate(spec, &self.load, self.rho_diff, v_target, opts),
        }
    }

    fn build(
        &self,
        ctx: &Ctx,
        s_l: f64,
        x: [f64; 2],
        flag: ShapeFlag,
        opts: &SolveOptions,
    ) -> Result<ShapeSolution, ShapeError> {
        let (beta, z_p0) = (x[0], x[1]);
        let spec = self.spec;
        let curve = &spec.zp_curve;
        let (_, _, tension) = ctx.start(beta, z_p0).ok_or(ShapeError::SlackBase {
            tension: tension_unchecked(spec, &self.load, self.rho_diff, beta, z_p0),
        })?;
        let (end, mid) = ctx
            .integrate(beta, z_p0, s_l, opts.mid_samples.max(3))
            .ok_or_else(|| ShapeError::NoConvergence {
                residual: [f64::NAN; 2],
                message: "mid-section failed to re-integrate".into(),
            })?;
        let target = curve.eval(s_l);
        let residuals = [end[0] - target.theta, end[2] - target.r];
        let z_shift = end[3] - target.z;
        let volume = ctx.total_volume(beta, s_l, &end);

        let mut out = CurveBuilder::default();
        base_section(&mut out, spec.r_sp, beta, opts.section_samples.max(3));
        let mid_start = out.s.len();
        let mut q = Vec::with_capacity(mid.len());
        for (s, y) in mid.iter().skip(1) {
            out.push(*s, y[0], y[2], y[3]);
            q.push(y[1]);
        }
        // The first mid sample coincides with the last base point.
        let mid_range = (mid_start - 1)..out.s.len();
        q.insert(0, mid[0].1[1]);
        apex_section(&mut out, curve, s_l, z_shift, opts.section_samples.max(3));

        let summary = summarise(&out, spec, beta, z_p0, tension, s_l, volume, flag, mid_start - 1);
        Ok(ShapeSolution {
            summary,
            rho_diff: self.rho_diff,
            residuals,
            curve: out.finish(mid_range, q),
        })
    }

    fn full_inflation(&self, ctx: &Ctx, opts: &SolveOptions) -> Result<ShapeSolution, ShapeError> {
        let spec = self.spec;
        let curve = &spec.zp_curve;
        // Separation angle and zero-pressure height from the family member closest to
        // full inflation; without a family, the SP contact ends where the inflated
        // curve leaves the sphere.
        let (beta, z_p0) = match self
            .nodes
            .iter()
            .max_by(|a, b| a.volume.total_cmp(&b.volume))
        {
            Some(n) => (n.beta, n.z_p0),
            None => (contact_angle(spec), curve.height()),
        };
        let tension = tension_unchecked(spec, &self.load, ctx.rho_diff, beta, z_p0);
        let mut out = CurveBuilder::default();
        base_section(&mut out, spec.r_sp, beta, opts.section_samples.max(3));
        let s0 = spec.r_sp * beta;
        let z_shift = out.z[out.z.len() - 1] - curve.eval(s0).z;
        let join = out.s.len() - 1;
        apex_section(&mut out, curve, s0, z_shift, opts.section_samples.max(3));
        let volume = spec.inflated_volume();
        let summary = summarise(
            &out,
            spec,
            beta,
            z_p0,
            tension,
            s0,
            volume,
            ShapeFlag::FullInflation,
            join,
        );
        Ok(ShapeSolution {
            summary,
            rho_diff: ctx.rho_diff,
            residuals: [0.0; 2],
            curve: out.finish(join..join + 1, vec![f64::NAN]),
        })
    }
}

/// Polar angle where the inflated curve stops coinciding with the SP sphere (zero if
/// it only touches at the bottom apex).
fn contact_angle(spec: &EnvelopeSpec) -> f64 {
    let r = spec.r_sp;
    let curve = &spec.zp_curve;
    let on_sphere = |s: f64| {
        let p = curve.eval(s);
        let phi = s / r;
        (p.r - r * phi.sin()).abs() < 1e-9 && (p.z - r * (1.0 - phi.cos())).abs() < 1e-9
    };
    let mut lo = 0.0;
    let mut hi = (PI * r).min(curve.s_total());
    if on_sphere(hi) {
        return hi / r;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if on_sphere(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo / r).max(BETA_MIN)
}

#[derive(Default)]
struct CurveBuilder {
    s: Vec<f64>,
    theta: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
}

impl CurveBuilder {
    fn push(&mut self, s: f64, theta: f64, r: f64, z: f64) {
        self.s.push(s);
        self.theta.push(theta);
        self.r.push(r);
        self.z.push(z);
    }

    fn finish(self, mid: Range<usize>, q: Vec<f64>) -> ShapeCurve {
        ShapeCurve {
            s: self.s,
            theta: self.theta,
            r: self.r,
            z: self.z,
            mid,
            q,
        }
    }
}

fn base_section(out: &mut CurveBuilder, r_sp: f64, beta: f64, n: usize) {
    for i in 0..n {
        let phi = beta * i as f64 / (n - 1) as f64;
        out.push(
            r_sp * phi,
            FRAC_PI_2 - phi,
            r_sp * phi.sin(),
            r_sp * (1.0 - phi.cos()),
        );
    }
}

/// Appends the inflated curve from `s_from` (exclusive) to the top apex, shifted
/// vertically by `z_shift`. Interior breakpoints are included so kinks are exact.
fn apex_section(
    out: &mut CurveBuilder,
    curve: &super::InflatedCurve,
    s_from: f64,
    z_shift: f64,
    n: usize,
) {
    let st = curve.s_total();
    let mut pts: Vec<f64> = (1..n)
        .map(|i| s_from + (st - s_from) * i as f64 / (n - 1) as f64)
        .collect();
    if !matches!(curve, super::InflatedCurve::Sampled { .. }) {
        pts.extend(curve.breakpoints().into_iter().filter(|&k| k > s_from && k < st));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
    }
    for s in pts {
        let p = curve.eval(s);
        out.push(s, p.theta, p.r, p.z + z_shift);
    }
}

/// Trapezoid over consecutive samples of `f(i)·ds`.
fn trapz(c: &CurveBuilder, range: Range<usize>, f: impl Fn(usize) -> f64) -> f64 {
    range
        .clone()
        .skip(1)
        .map(|i| 0.5 * (f(i - 1) + f(i)) * (c.s[i] - c.s[i - 1]))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn summarise(
    c: &CurveBuilder,
    spec: &EnvelopeSpec,
    beta: f64,
    z_p0: f64,
    tension: f64,
    s_l: f64,
    volume: f64,
    flag: ShapeFlag,
    free_start: usize,
) -> ShapeSummary {
    let r = spec.r_sp;
    let n = c.s.len();
    let a_side = trapz(c, 0..n, |i| 2.0 * c.r[i] * c.theta[i].cos());
    let r_max = c.r.iter().cloned().fold(0.0, f64::max);
    let bubble = c.r[free_start..].iter().cloned().fold(0.0, f64::max);
    let contact = 2.0 * PI * r * r * (1.0 - beta.cos());
    let free = |top: bool| {
        trapz(c, free_start..n, |i| {
            if (c.theta[i] < -FRAC_PI_4) == top {
                2.0 * PI * c.r[i]
            } else {
                0.0
            }
        })
    };
    ShapeSummary {
        volume,
        a_top: PI * r_max * r_max,
        a_side,
        beta,
        z_p0,
        tension,
        s0: r * beta,
        s_l,
        node_areas: [contact, spec.sp_area() - contact, free(false), free(true)],
        bubble_diameter: 2.0 * bubble,
        height: c.z[n - 1] - c.z[0],
        flag,
    }
}

/// Bubble-on-tendon approximation for gas volumes below the reach of the taut
/// mid-section: the film wraps the whole SP sphere, a collapsed tendon rises from its
/// top and the helium fills a cap of the inflated curve.
pub fn degenerate(
    spec: &EnvelopeSpec,
    load: &ShapeLoad,
    rho_diff: f64,
    v_target: f64,
    opts: &SolveOptions,
) -> Result<ShapeSolution, ShapeError> {
    let curve = &spec.zp_curve;
    let st = curve.s_total();
    let r = spec.r_sp;
    let v_gas = (v_target - spec.sp_volume()).max(0.0);
    let s_c = if v_gas <= 0.0 {
        st
    } else {
        brent(|s| Some(curve.cap_volume(s) - v_gas), 0.0, st, 1e-12, 200).ok_or(
            ShapeError::Infeasible {
                volume: v_target,
                min: spec.sp_volume(),
                max: spec.inflated_volume(),
            },
        )?
    };
    let beta = PI - BETA_MIN;
    let n = opts.section_samples.max(3);
    let mut out = CurveBuilder::default();
    base_section(&mut out, r, PI, n);
    let tendon = (s_c - PI * r).max(0.0);
    let sp_top = 2.0 * r;
    if tendon > 0.0 {
        for i in 1..n {
            let t = tendon * i as f64 / (n - 1) as f64;
            out.push(PI * r + t, 0.0, 0.0, sp_top + t);
        }
    }
    let z_p0 = sp_top + tendon;
    let join = out.s.len() - 1;
    let s_base_end = out.s[join];
    let cap_bottom = curve.eval(s_c);
    // Cap joins at the axis in the collapsed picture; its own base disc sits at z_p0.
    let z_shift = z_p0 - cap_bottom.z;
    let mut pts: Vec<f64> = (0..n)
        .map(|i| s_c + (st - s_c) * i as f64 / (n - 1) as f64)
        .collect();
    if !matches!(curve, super::InflatedCurve::Sampled { .. }) {
        pts.extend(curve.breakpoints().into_iter().filter(|&k| k > s_c && k < st));
        pts.sort_by(f64::total_cmp);
    }
    for s in pts {
        let p = curve.eval(s);
        out.push(s_base_end + (s - s_c) + 1e-12, p.theta, p.r, p.z + z_shift);
    }
    let tension = tension_unchecked(spec, load, rho_diff, beta, z_p0);
    let mut summary = summarise(
        &out,
        spec,
        beta,
        z_p0,
        tension,
        s_c,
        v_target,
        ShapeFlag::Degenerate,
        join,
    );
    // The horizontal disc closing the cap is gas/film interface, not extra side area.
    summary.a_side = PI * r * r + curve.integrate(s_c, st, |p| 2.0 * p.r * p.theta.cos());
    Ok(ShapeSolution {
        summary,
        rho_diff,
        residuals: [0.0; 2],
        curve: out.finish(join..join + 1, vec![f64::NAN]),
    })
}

/// Solves the equilibrium shape enclosing the requested volume.
pub fn solve_shape(
    spec: &EnvelopeSpec,
    rho_diff: f64,
    request: VolumeRequest,
    load: &ShapeLoad,
    opts: &SolveOptions,
) -> Result<ShapeSolution, ShapeError> {
    let family = ShapeFamily::trace(spec, *load, rho_diff)?;
    family.solve(request.total_volume(spec), opts)
}
