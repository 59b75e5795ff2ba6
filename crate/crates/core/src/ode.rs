//! Small ODE toolkit: a fixed-step RK4 used by the flight engine and an adaptive
//! Dormand-Prince 5(4) pair used by the shape boundary-value solver.

/// Classic fourth-order Runge-Kutta step for `y' = f(t, y)`.
///
/// `f` writes the derivative of its second argument into the third. Errors raised by
/// `f` abort the step and are returned unchanged.
pub fn rk4_step<E, F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E> + ?Sized,
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    f(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4)?;

    Ok((0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Tolerances and step limits for [`dopri5`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

/// Failure modes of the adaptive integrator.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrationFailure<E> {
    /// The right-hand side refused to evaluate (e.g. a singular state).
    Rhs { t: f64, error: E },
    /// The step size underflowed or the step budget ran out.
    StepControl { t: f64 },
}

/// Accepted points of an adaptive integration.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.y.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`) with error control, landing
/// exactly on `t1`. Every accepted step is recorded.
pub fn dopri5<E, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &AdaptiveOptions,
) -> Result<Trajectory, IntegrationFailure<E>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E> + ?Sized,
{
    let n = y0.len();
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
    };
    if t1 <= t0 {
        return Ok(traj);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.h_init.min(opts.h_max).min(t1 - t0);
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    let rhs = |f: &mut F, t: f64, y: &[f64], out: &mut [f64]| {
        f(t, y, out).map_err(|error| IntegrationFailure::Rhs { t, error })
    };

    rhs(f, t, &y, &mut k[0])?;
    let mut steps = 0;
    while t < t1 {
        steps += 1;
        if steps > opts.max_steps || h < 1e-14 * t1.abs().max(1.0) {
            return Err(IntegrationFailure::StepControl { t });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k[0][i];
        }
        rhs(f, t + C2 * h, &tmp, &mut k[1])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(f, t + C3 * h, &tmp, &mut k[2])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(f, t + C4 * h, &tmp, &mut k[3])?;
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(f, t + C5 * h, &tmp, &mut k[4])?;
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k[0][i]
                    + A62 * k[1][i]
                    + A63 * k[2][i]
                    + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        rhs(f, t + h, &tmp, &mut k[5])?;
        for i in 0..n {
            y_new[i] = y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        rhs(f, t + h, &y_new, &mut k[6])?;

        let mut err = 0.0_f64;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }

        if err <= 1.0 || !err.is_finite() && h < 1e-12 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            traj.t.push(t);
            traj.y.push(y.clone());
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= fac;
        }
    }
    Ok(traj)
}

/// Brent's bracketing root finder on `[a, b]`. Requires `f(a)` and `f(b)` of opposite
/// sign; returns `None` otherwise or when `f` fails to evaluate.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> Option<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Some(b)
}
