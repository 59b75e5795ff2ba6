//! Translational equations of motion coupled to gas transfer, thermodynamics, heat
//! transfer and shape, advanced by a deterministic fixed-step engine.

mod config;
mod engine;
mod environment;
mod record;

pub use config::{AerobotConfig, EnvelopeConfig, FillConfig, FilmThermal};
pub use engine::{
    build_table, initial_zp_mass, net_vertical_force, DeviceState, EnergyLedger, Engine, SimState,
    ThermalState, HYSTERESIS_PA, SANITY_BAND_K,
};
pub use environment::{Environment, SolarClock};
pub use record::{TrajectoryRecord, TrajectoryRow, TRAJECTORY_HEADER};

use crate::atmosphere::AtmosphereError;
use crate::gastransfer::TransferError;
use crate::heat::HeatError;
use crate::shape::ShapeError;
use crate::thermo::ThermoError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("shape: {0}")]
    Shape(#[from] ShapeError),
    #[error("atmosphere: {0}")]
    Atmosphere(#[from] AtmosphereError),
    #[error("gas transfer: {0}")]
    Transfer(#[from] TransferError),
    #[error("heat network: {0}")]
    Heat(#[from] HeatError),
    #[error("gas state: {0}")]
    Thermo(#[from] ThermoError),
    #[error("fault at t = {t} s: {reason}")]
    Fault { t: f64, reason: String },
}
