//! Exact spectral analysis of the single-shelf shuffle.

pub mod error;
pub mod float;
pub mod guessing;
pub mod matrices;
pub mod numerics;
pub mod simulator;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use matrices::RationalMatrix;
pub use numerics::Rational;
