//! Quadratic drag with shape-dependent projected areas, and virtual mass.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("aerodynamic coefficients must be positive: {0}")]
pub struct AeroError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeroCoefficients {
    pub cd_top: f64,
    pub cd_side: f64,
    pub c_m: f64,
    /// Reference area; zero means "use the fully inflated top projection".
    #[serde(default)]
    pub a_ref: f64,
}

impl Default for AeroCoefficients {
    fn default() -> Self {
        Self { cd_top: 0.8, cd_side: 1.0, c_m: 0.2, a_ref: 0.0 }
    }
}

impl AeroCoefficients {
    pub fn validate(&self) -> Result<(), AeroError> {
        if self.cd_top > 0.0 && self.cd_side > 0.0 && self.c_m > 0.0 && self.a_ref > 0.0 {
            Ok(())
        } else {
            Err(AeroError(format!("{self:?}")))
        }
    }
}

/// Reference-area drag coefficients in body axes (east, north, up).
pub fn drag_matrix(c: &AeroCoefficients, a_top: f64, a_side: f64) -> Matrix3<f64> {
    let side = c.cd_side * a_side / c.a_ref;
    Matrix3::from_diagonal(&Vector3::new(side, side, c.cd_top * a_top / c.a_ref))
}

/// Drag on a body moving at `v_rel` relative to the air.
pub fn drag_force(rho: f64, c: &AeroCoefficients, cd: &Matrix3<f64>, v_rel: Vector3<f64>) -> Vector3<f64> {
    -0.5 * rho * c.a_ref * v_rel.norm() * (cd * v_rel)
}

pub fn virtual_mass(c_m: f64, rho: f64, volume: f64) -> f64 {
    c_m * rho * volume
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a_ref: f64) -> AeroCoefficients {
        AeroCoefficients { a_ref, ..Default::default() }
    }

    #[test]
    fn matrix_examples() {
        let c = coeffs(19.63);
        let m = drag_matrix(&c, 19.63, 19.63);
        assert_eq!(m, Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.8)));
        let half = drag_matrix(&c, 0.5 * 19.63, 19.63);
        assert!((half[(2, 2)] - 0.4).abs() < 1e-15);
        assert!((0..3).all(|i| (0..3).all(|j| i == j || m[(i, j)] == 0.0)));
    }

    #[test]
    fn force_examples() {
        let c = coeffs(19.63);
        let m = drag_matrix(&c, 19.63, 10.0);
        assert_eq!(drag_force(1.03, &c, &m, Vector3::zeros()), Vector3::zeros());
        let f = drag_force(1.03, &c, &m, Vector3::new(0.0, 0.0, 1.0));
        assert!((f.z + 8.09).abs() < 0.005);
        let f2 = drag_force(1.03, &c, &m, Vector3::new(0.0, 0.0, 2.0));
        assert!((f2.z / f.z - 4.0).abs() < 1e-12);
    }

    #[test]
    fn virtual_mass_examples() {
        assert_eq!(virtual_mass(0.2, 1.0, 0.0), 0.0);
        assert!((virtual_mass(0.2, 1.0, 50.0) - 10.0).abs() < 1e-12);
        assert!((virtual_mass(0.2, 2.0, 50.0) - 20.0).abs() < 1e-12);
    }
}
