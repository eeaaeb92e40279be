//! Simulation and reconstruction of two-color random sceneries seen along a
//! simple random walk.

pub mod crossings;
pub mod error;
pub mod harness;
pub mod localization;
pub mod reconstruct;
pub mod walks;

pub use error::{Error, Result};
