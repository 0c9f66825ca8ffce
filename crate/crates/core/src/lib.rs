//! Covariance-matrix simulation of quantum (two-mode squeezed vacuum) and
//! classical (correlated thermal noise) radar sources, with correlation,
//! detection and relative-entropy analysis of the target-detection problem.
//!
//! States are zero-mean Gaussian, described by covariance matrices in the
//! interleaved quadrature order `(q₁, p₁, q₂, p₂, …)` with vacuum variance 1/2.

pub mod asymptotics;
pub mod channel;
pub mod correlation;
pub mod detection;
pub mod distributions;
pub mod error;
pub mod fock;
mod fmt;
pub mod gaussian;
pub mod runner;
pub mod sources;

pub use error::{Error, Result};
pub use fmt::fmt_f64;
