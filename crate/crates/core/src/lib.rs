//! Channel estimation for waveguide-based pinching-antenna systems.
//!
//! A user in the near field of a long dielectric waveguide is observed by
//! activating one pinching antenna per pilot slot. This crate provides
//!
//! - [`geometry`]: the free-space multipath channel over every candidate
//!   antenna position,
//! - [`pilot`]: pilot symbols and sequential single-antenna reception,
//! - [`estimator`]: the full-array LS baseline and the two-subarray sparse
//!   estimator (OMP over angle and distance dictionaries, gain LS, full CSI
//!   reconstruction),
//! - [`metrics`]: NMSE, antenna selection and achievable rate,
//! - [`harness`]: seeded Monte Carlo trials, power and subarray sweeps, CSV
//!   output.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub(crate) mod linalg;
pub mod metrics;
pub mod pilot;

pub use error::{Error, Result};
pub use geometry::{ChannelVector, PathSet, Polar, Scatterer, Scene, WaveguideConfig};
pub use num_complex::Complex64;
