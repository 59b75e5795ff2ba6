//! As-fabricated envelope geometry: the fully inflated zero-pressure meridian and the
//! superpressure sphere nested at its bottom apex.
//!
//! Meridians are parameterised by arclength `s` from the bottom apex. The tangent
//! angle `theta` is measured from the vertical, so `dr/ds = sin(theta)` and
//! `dz/ds = cos(theta)`; it is π/2 at the bottom apex and −π/2 at the top.

use super::ShapeError;
use std::f64::consts::{FRAC_PI_2, PI};

/// One point of a meridian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub r: f64,
    pub z: f64,
    pub theta: f64,
}

/// The fully inflated zero-pressure meridian.
#[derive(Debug, Clone, PartialEq)]
pub enum InflatedCurve {
    /// Lower sphere, tangent cone, upper sphere.
    SphereConeSphere {
        upper_radius: f64,
        lower_radius: f64,
        /// Angle of the cone wall from the vertical.
        cone_half_angle: f64,
    },
    /// Tabulated meridian, linearly interpolated.
    Sampled {
        s: Vec<f64>,
        r: Vec<f64>,
        theta: Vec<f64>,
        z: Vec<f64>,
    },
}

impl InflatedCurve {
    pub fn sphere_cone_sphere(
        upper_diameter: f64,
        lower_diameter: f64,
        cone_half_angle: f64,
    ) -> Result<Self, ShapeError> {
        if !(upper_diameter > lower_diameter && lower_diameter > 0.0) {
            return Err(ShapeError::InvalidSpec(
                "sphere-cone-sphere needs upper diameter > lower diameter > 0".into(),
            ));
        }
        if !(cone_half_angle > 0.0 && cone_half_angle < FRAC_PI_2) {
            return Err(ShapeError::InvalidSpec(
                "cone half angle must lie in (0, 90°)".into(),
            ));
        }
        Ok(Self::SphereConeSphere {
            upper_radius: 0.5 * upper_diameter,
            lower_radius: 0.5 * lower_diameter,
            cone_half_angle,
        })
    }

    pub fn sampled(s: Vec<f64>, r: Vec<f64>, theta: Vec<f64>, z: Vec<f64>) -> Result<Self, ShapeError> {
        let n = s.len();
        if n < 3 || r.len() != n || theta.len() != n || z.len() != n {
            return Err(ShapeError::InvalidSpec(
                "sampled curve needs at least three equally sized columns".into(),
            ));
        }
        if s[0] != 0.0 || s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ShapeError::InvalidSpec(
                "sampled curve arclength must start at 0 and increase".into(),
            ));
        }
        if r[0].abs() > 1e-9 || r[n - 1].abs() > 1e-9 {
            return Err(ShapeError::InvalidSpec(
                "inflated curve must start and end on the axis (r = 0)".into(),
            ));
        }
        if r[1..n - 1].iter().any(|&x| !(x > 0.0)) {
            return Err(ShapeError::InvalidSpec(
                "inflated curve radius must be positive between the apexes".into(),
            ));
        }
        Ok(Self::Sampled { s, r, theta, z })
    }

    /// Arclength at which each smooth piece ends, starting with 0 and ending with
    /// `s_total`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::SphereConeSphere { .. } => {
                let (sa, sb, st) = self.scs_knots();
                vec![0.0, sa, sb, st]
            }
            Self::Sampled { s, .. } => s.clone(),
        }
    }

    fn scs_knots(&self) -> (f64, f64, f64) {
        let Self::SphereConeSphere {
            upper_radius: r1,
            lower_radius: r2,
            cone_half_angle: a,
        } = *self
        else {
            unreachable!()
        };
        let sa = r2 * (FRAC_PI_2 - a);
        let cone = (r1 - r2) * a.cos() / a.sin();
        let sb = sa + cone;
        (sa, sb, sb + r1 * (FRAC_PI_2 + a))
    }

    pub fn s_total(&self) -> f64 {
        match self {
            Self::SphereConeSphere { .. } => self.scs_knots().2,
            Self::Sampled { s, .. } => s[s.len() - 1],
        }
    }

    pub fn eval(&self, s: f64) -> CurvePoint {
        let s = s.clamp(0.0, self.s_total());
        match *self {
            Self::SphereConeSphere {
                upper_radius: r1,
                lower_radius: r2,
                cone_half_angle: a,
            } => {
                let (sa, sb, _) = self.scs_knots();
                let c2 = r2;
                let c1 = c2 + (r1 - r2) / a.sin();
                if s <= sa {
                    let phi = s / r2;
                    CurvePoint {
                        r: r2 * phi.sin(),
                        z: c2 - r2 * phi.cos(),
                        theta: FRAC_PI_2 - phi,
                    }
                } else if s <= sb {
                    let t = s - sa;
                    CurvePoint {
                        r: r2 * a.cos() + t * a.sin(),
                        z: c2 - r2 * a.sin() + t * a.cos(),
                        theta: a,
                    }
                } else {
                    let phi = FRAC_PI_2 - a + (s - sb) / r1;
                    CurvePoint {
                        r: (r1 * phi.sin()).max(0.0),
                        z: c1 - r1 * phi.cos(),
                        theta: FRAC_PI_2 - phi,
                    }
                }
            }
            Self::Sampled {
                s: ref ss,
                ref r,
                ref theta,
                ref z,
            } => {
                let n = ss.len();
                let i = ss.partition_point(|&x| x <= s).clamp(1, n - 1);
                let u = (s - ss[i - 1]) / (ss[i] - ss[i - 1]);
                let lerp = |v: &[f64]| v[i - 1] + u * (v[i] - v[i - 1]);
                CurvePoint {
                    r: lerp(r),
                    z: lerp(z),
                    theta: lerp(theta),
                }
            }
        }
    }

    /// ∫ f(point) ds over `[s_a, s_b]`, with composite Gauss-Legendre panels that
    /// never straddle a breakpoint.
    pub fn integrate<F: FnMut(CurvePoint) -> f64>(&self, s_a: f64, s_b: f64, mut f: F) -> f64 {
        if !(s_b > s_a) {
            return 0.0;
        }
        let mut knots: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .filter(|&k| k > s_a && k < s_b)
            .collect();
        knots.insert(0, s_a);
        knots.push(s_b);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let len = w[1] - w[0];
            let panels = ((len / 0.02).ceil() as usize).max(1);
            let h = len / panels as f64;
            for p in 0..panels {
                let mid = w[0] + (p as f64 + 0.5) * h;
                for (x, wt) in GAUSS5 {
                    total += 0.5 * h * wt * f(self.eval(mid + 0.5 * h * x));
                }
            }
        }
        total
    }

    /// Volume enclosed by the surface of revolution of the arc `[s, s_total]`,
    /// closed by the horizontal disc through its lower end.
    pub fn cap_volume(&self, s: f64) -> f64 {
        self.integrate(s, self.s_total(), |p| PI * p.r * p.r * p.theta.cos())
    }

    pub fn volume(&self) -> f64 {
        self.cap_volume(0.0)
    }

    pub fn surface_area(&self, s_a: f64, s_b: f64) -> f64 {
        self.integrate(s_a, s_b, |p| 2.0 * PI * p.r)
    }

    pub fn max_radius(&self) -> f64 {
        match *self {
            Self::SphereConeSphere { upper_radius, .. } => upper_radius,
            Self::Sampled { ref r, .. } => r.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn height(&self) -> f64 {
        let st = self.s_total();
        self.eval(st).z - self.eval(0.0).z
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Geometry and film properties of a balloon-in-balloon envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSpec {
    /// Superpressure sphere radius [m].
    pub r_sp: f64,
    pub zp_curve: InflatedCurve,
    /// Zero-pressure film areal mass [kg/m²].
    pub areal_mass_zp: f64,
    /// Superpressure film areal mass [kg/m²].
    pub areal_mass_sp: f64,
}

impl EnvelopeSpec {
    pub fn new(
        r_sp: f64,
        zp_curve: InflatedCurve,
        areal_mass_zp: f64,
        areal_mass_sp: f64,
    ) -> Result<Self, ShapeError> {
        if !(r_sp > 0.0) {
            return Err(ShapeError::InvalidSpec("SP radius must be positive".into()));
        }
        if r_sp > zp_curve.max_radius() {
            return Err(ShapeError::InvalidSpec(
                "SP radius exceeds the largest radius of the inflated ZP curve".into(),
            ));
        }
        if !(areal_mass_zp > 0.0 && areal_mass_sp > 0.0) {
            return Err(ShapeError::InvalidSpec(
                "film areal masses must be positive".into(),
            ));
        }
        Ok(Self {
            r_sp,
            zp_curve,
            areal_mass_zp,
            areal_mass_sp,
        })
    }

    /// Builds the spec from total film masses, spreading each over its surface.
    pub fn from_film_masses(
        r_sp: f64,
        zp_curve: InflatedCurve,
        m_zp_film: f64,
        m_sp_film: f64,
    ) -> Result<Self, ShapeError> {
        let a_zp = zp_curve.surface_area(0.0, zp_curve.s_total());
        let a_sp = 4.0 * PI * r_sp * r_sp;
        Self::new(r_sp, zp_curve, m_zp_film / a_zp, m_sp_film / a_sp)
    }

    pub fn sp_volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.r_sp.powi(3)
    }

    pub fn sp_area(&self) -> f64 {
        4.0 * PI * self.r_sp * self.r_sp
    }

    pub fn inflated_volume(&self) -> f64 {
        self.zp_curve.volume()
    }

    pub fn zp_film_area(&self) -> f64 {
        self.zp_curve.surface_area(0.0, self.zp_curve.s_total())
    }

    pub fn zp_film_mass(&self) -> f64 {
        self.areal_mass_zp * self.zp_film_area()
    }

    pub fn sp_film_mass(&self) -> f64 {
        self.areal_mass_sp * self.sp_area()
    }

    /// Top projected area of the fully inflated envelope.
    pub fn inflated_top_area(&self) -> f64 {
        PI * self.zp_curve.max_radius().powi(2)
    }

    /// Fill fraction of a total enclosed volume: 0 at SP displacement, 1 at full
    /// inflation.
    pub fn fill_fraction(&self, volume: f64) -> f64 {
        let vsp = self.sp_volume();
        (volume - vsp) / (self.inflated_volume() - vsp)
    }

    pub fn volume_at_fill(&self, fill: f64) -> f64 {
        let vsp = self.sp_volume();
        vsp + fill * (self.inflated_volume() - vsp)
    }
}
