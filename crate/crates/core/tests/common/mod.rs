#![allow(dead_code)]

use aerobot_core::scenario::{load_preset, Scenario};
use aerobot_core::shape::{EnvelopeSpec, InflatedCurve, ShapeCurve, ShapeFamily, ShapeFlag, ShapeLoad, SolveOptions};
use aerobot_core::ShapeTable;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

pub const G: f64 = 9.81;

pub fn nevada() -> Scenario {
    load_preset("nevada-flight2").unwrap()
}

pub fn venus() -> Scenario {
    load_preset("venus-b2").unwrap()
}

pub fn nevada_table() -> Arc<ShapeTable> {
    static T: OnceLock<Arc<ShapeTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(nevada().build_table().unwrap())).clone()
}

pub fn venus_table() -> Arc<ShapeTable> {
    static T: OnceLock<Arc<ShapeTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(venus().build_table().unwrap())).clone()
}

/// The flight-2 envelope: 5 m / 2.5 m sphere-cone-sphere with a 2.5 m SP.
pub fn nevada_spec() -> EnvelopeSpec {
    let curve = InflatedCurve::sphere_cone_sphere(5.0, 2.5, 30f64.to_radians()).unwrap();
    EnvelopeSpec::from_film_masses(1.25, curve, 10.3, 11.0).unwrap()
}

/// Loads near the 2 km float: air at about 1.0 kg/m³ around helium at 0.139.
pub fn nevada_load() -> (ShapeLoad, f64) {
    let rho_zp = 0.139;
    let load = ShapeLoad { m_payload: 26.5, m_sp_gas: 1.22, rho_zp, gravity: G };
    (load, 1.006 - rho_zp)
}

/// Trapezoid rule over paired samples.
pub fn trapz(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (b[0] + b[1]) * (a[1] - a[0])).sum()
}

/// Volume of revolution of a sampled meridian, ∫ π r² dz.
pub fn revolved_volume(c: &ShapeCurve) -> f64 {
    let r2: Vec<f64> = c.r.iter().map(|r| PI * r * r).collect();
    trapz(&c.z, &r2)
}

/// Classical RK4 on a scalar ODE.
pub fn rk4(mut y: f64, t0: f64, t1: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = (t1 - t0) / n as f64;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

/// Vertical pressure force on the film wrapped over the SP sphere from the bottom
/// pole to polar angle `beta`, by brute-force quadrature over surface patches.
/// Gas pressure relative to the zero-pressure level is `b (z_p0 - z)` pressing
/// inward on the sphere.
pub fn cap_force_quadrature(beta: f64, z_p0: f64, rho_diff: f64, r: f64, g: f64) -> f64 {
    let b = rho_diff * g;
    let (n_phi, n_psi) = (20_000, 16);
    let d_phi = beta / n_phi as f64;
    let d_psi = 2.0 * PI / n_psi as f64;
    let mut f = 0.0;
    for i in 0..n_phi {
        let phi = (i as f64 + 0.5) * d_phi;
        let z = r * (1.0 - phi.cos());
        let area = r * r * phi.sin() * d_phi * d_psi;
        for _ in 0..n_psi {
            // Inward normal points up by cos(phi) on the lower hemisphere.
            f += b * (z_p0 - z) * phi.cos() * area;
        }
    }
    f
}

/// Independent checks on one solved shape.
#[derive(Debug, Clone, Copy)]
pub struct ShapeCheck {
    pub fill: f64,
    pub flag: ShapeFlag,
    pub max_residual: f64,
    /// Revolved volume of the sampled curve against the solver's volume, relative.
    pub volume_error: f64,
    /// Vertical force balance of the computed surface, relative to the supported load.
    pub closure: f64,
}

/// Solves the flight-2 shape at `n` volumes spread across the traced family.
pub fn nevada_shape_sweep(n: usize) -> Vec<ShapeCheck> {
    let spec = nevada_spec();
    let (load, rho) = nevada_load();
    let family = ShapeFamily::trace(&spec, load, rho).unwrap();
    let (lo, hi) = family.volume_range().unwrap();
    let w = spec.areal_mass_zp * G;
    let b = rho * G;
    (0..n)
        .map(|k| {
            let v = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
            let sol = family.solve(v, &SolveOptions::fine()).unwrap();
            let c = &sol.curve;
            let vol = revolved_volume(c);

            // Gas pressure on the base and free film plus the tension taken up by
            // the as-fabricated apex carries the payload, SP, both films' weight
            // and the gas displaced by the SP.
            let z_p0 = sol.summary.z_p0;
            let integrate = |range: std::ops::Range<usize>, f: &dyn Fn(usize) -> f64| {
                let y: Vec<f64> = range.clone().map(f).collect();
                trapz(&c.s[range], &y)
            };
            let pressure = |i: usize| -b * (c.z[i] - z_p0) * c.theta[i].sin() * 2.0 * PI * c.r[i];
            let film = |i: usize| w * 2.0 * PI * c.r[i];
            let lower = 0..c.mid.end;
            let lift = integrate(lower.clone(), &pressure);
            let i_l = c.mid.end - 1;
            let apex_tension = 2.0 * PI / c.q[c.q.len() - 1] * c.theta[i_l].cos();
            let r = spec.r_sp;
            let supported = G * (load.m_payload + spec.sp_film_mass() + load.m_sp_gas
                - 4.0 / 3.0 * PI * r.powi(3) * load.rho_zp)
                + integrate(lower, &film);
            ShapeCheck {
                fill: spec.fill_fraction(v),
                flag: sol.summary.flag,
                max_residual: sol.residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
                volume_error: ((vol - sol.summary.volume) / sol.summary.volume).abs(),
                closure: ((lift + apex_tension - supported) / supported).abs(),
            }
        })
        .collect()
}
