//! Mean-value and Gaussian-fluctuation dynamics of a modulated optomechanical
//! cavity.

pub mod acceptance;
pub mod classical;
pub mod config;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod params;
pub mod perturbative;
pub mod series;
pub mod sweep;
pub mod svg;

pub use error::{Error, Result};
