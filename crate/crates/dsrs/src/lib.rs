//! Certified robustness radii for smoothed classifiers that are evaluated
//! under two noise distributions at once.

pub mod certify;
pub mod confidence;
pub mod distributions;
pub mod error;
pub mod heuristics;
pub mod numerics;
pub mod synthetic;
mod quadrature;

pub use error::{Error, Result};
