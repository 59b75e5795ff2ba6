//! Command-line front end for the aerobot simulator.
//!
//! Exit codes are stable: see [`app::exit`].

pub mod app;
pub mod session;

pub use app::run;
