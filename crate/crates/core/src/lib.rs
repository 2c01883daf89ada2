//! Two-mode Gaussian interferometry with passive (beam splitter) and active (parametric
//! amplifier) elements: symplectic optics, quantum Fisher information through the
//! symmetric logarithmic derivative, photocurrent statistics with lossy detectors, and
//! optimization of the input states.

pub mod error;
pub mod gaussian;
pub mod interferometers;
pub mod optimizer;
pub mod detection;
pub mod qfi;

pub use error::{Error, Result};
