//! Physical constants shared across the engine.

/// Stefan-Boltzmann constant [W/(m²·K⁴)].
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;

/// Universal gas constant [J/(mol·K)].
pub const UNIVERSAL_GAS_CONSTANT: f64 = 8.314_462_618;

/// Standard Earth gravity used by the Earth presets [m/s²].
pub const EARTH_GRAVITY: f64 = 9.81;

/// Venus surface gravity [m/s²].
pub const VENUS_GRAVITY: f64 = 8.87;

/// Mean Venus radius [m].
pub const VENUS_RADIUS: f64 = 6.0518e6;

/// Mean Earth radius [m].
pub const EARTH_RADIUS: f64 = 6.371e6;

/// Venus solar day [s] (116.75 Earth days).
pub const VENUS_SOLAR_DAY: f64 = 116.75 * 86_400.0;

/// Helium constant-volume specific heat [J/(kg·K)].
pub const HELIUM_CV: f64 = 3116.0;

/// Helium constant-pressure specific heat [J/(kg·K)].
pub const HELIUM_CP: f64 = 5193.0;

/// Helium specific gas constant [J/(kg·K)]. Equal to `HELIUM_CP - HELIUM_CV`.
pub const HELIUM_R: f64 = 2077.0;

/// Helium molar mass [kg/mol].
pub const HELIUM_MOLAR_MASS: f64 = 4.002_602e-3;
