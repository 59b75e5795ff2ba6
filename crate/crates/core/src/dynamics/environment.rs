use crate::atmosphere::{AtmosphereProfile, RadiationEnvironment};
use std::f64::consts::PI;

/// Sub-solar longitude model for a slowly rotating planet with zero obliquity.
/// The hour angle `H = lon_ss(t) − lon` grows with time at a fixed site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarClock {
    pub subsolar_lon0: f64,
    /// Sub-solar longitude rate [rad/s].
    pub rate: f64,
}

impl SolarClock {
    /// Clock such that the site (lon0) sees local solar time `lst_h` at t = 0.
    pub fn from_local_time(lon0: f64, lst_h: f64, solar_day_s: f64) -> Self {
        Self {
            subsolar_lon0: lon0 + (lst_h - 12.0) * PI / 12.0,
            rate: 2.0 * PI / solar_day_s,
        }
    }

    pub fn hour_angle(&self, lon: f64, t: f64) -> f64 {
        self.subsolar_lon0 + self.rate * t - lon
    }

    pub fn zenith(&self, lat: f64, lon: f64, t: f64) -> f64 {
        (lat.cos() * self.hour_angle(lon, t).cos()).clamp(-1.0, 1.0).acos()
    }

    /// Local solar time in hours, 12 at local noon.
    pub fn local_solar_time(&self, lon: f64, t: f64) -> f64 {
        (12.0 + self.hour_angle(lon, t) * 12.0 / PI).rem_euclid(24.0)
    }
}

/// Everything outside the vehicle.
#[derive(Debug, Clone)]
pub struct Environment {
    pub atmosphere: AtmosphereProfile,
    pub radiation: RadiationEnvironment,
    pub planet_radius: f64,
    pub solar: Option<SolarClock>,
    /// Terrain elevation; `None` where the vehicle can never reach the surface.
    pub ground_alt: Option<f64>,
}

impl Environment {
    pub fn gravity(&self) -> f64 {
        self.atmosphere.surface_gravity
    }

    pub fn zenith(&self, lat: f64, lon: f64, t: f64) -> Option<f64> {
        self.solar.map(|s| s.zenith(lat, lon, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_local_time() {
        let c = SolarClock::from_local_time(0.3, 18.0, 1000.0);
        assert!((c.local_solar_time(0.3, 0.0) - 18.0).abs() < 1e-12);
        assert!((c.zenith(0.0, 0.3, 0.0) - PI / 2.0).abs() < 1e-12);
        // Three quarters of a solar day later the site is at local noon.
        assert!((c.local_solar_time(0.3, 750.0) - 12.0).abs() < 1e-9);
        assert!(c.zenith(0.0, 0.3, 750.0).abs() < 1e-6);
    }
}
