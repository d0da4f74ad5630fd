//! Simulation and processing toolkit for UAV magnetometer landmine surveys.
// `!(x > 0.0)` is how NaN gets rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod dsp;
pub mod error;
pub mod localize;
pub mod metrics;
pub mod rude;
pub mod scenario;
pub mod vec3;
pub mod waicup;

pub use error::{Error, Result};
pub use vec3::Vec3;
