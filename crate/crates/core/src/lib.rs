//! Physics engine for balloon-in-balloon variable-altitude aerobots.
//!
//! The crate is organised by physical subsystem:
//!
//! - [`atmosphere`]: tabulated planetary atmospheres, winds and radiative environments.
//! - [`shape`]: axisymmetric equilibrium shape of the zero-pressure envelope around the
//!   superpressure sphere, and precomputed shape tables.
//! - [`gastransfer`]: pump, vent and termination-poppet helium flows.
//! - [`thermo`]: gas chamber energy balances and ideal-gas closure.
//! - [`heat`]: radiative and convective heat flows between the six thermal nodes.
//! - [`aero`]: drag and virtual mass.
//! - [`dynamics`]: the fixed-step engine coupling everything together.
//! - [`scenario`]: scenario files, bundled presets, telemetry replay and Venus runs.

pub mod aero;
pub mod atmosphere;
pub mod constants;
pub mod dynamics;
pub mod gastransfer;
pub mod heat;
pub mod ode;
pub mod scenario;
pub mod shape;
pub mod thermo;

pub use atmosphere::{AtmosphereProfile, AtmosphereSample, RadiationEnvironment};
pub use dynamics::{AerobotConfig, Engine, SimState, TrajectoryRecord};
pub use scenario::Scenario;
pub use shape::{EnvelopeSpec, ShapeSolution, ShapeTable};
