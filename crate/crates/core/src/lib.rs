//! Simulation and asymptotics for extremes of vector Gaussian processes with trend.

pub mod acceptance;
pub mod asymptotics;
pub mod constants;
pub mod error;
pub mod exceedance;
mod mc;
pub mod orthant;
pub mod paths;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RngPolicy;
