//! Simulation and analysis primitives for single-photon plasmonic sensing.
//!
//! The crate is split along the measurement chain:
//!
//! - [`optics`]: TM reflectance of a prism / metal film / analyte stack
//!   (Kretschmann geometry), angle scans, resonance search and the
//!   index sensitivity of the reflectance.
//! - [`photon`]: probe and loss-channel models, seeded Monte-Carlo photon
//!   counting, shot-noise and sub-shot-noise error formulas, Fisher
//!   information and the Cramér–Rao bound.
//! - [`estimation`]: sample statistics, air-reference normalization,
//!   calibration fitting, index inversion, linear error propagation and
//!   the concentration-slope fit.
//! - [`rng`]: deterministic per-stream random number generators.

pub mod error;
pub mod estimation;
pub mod optics;
pub mod photon;
pub mod rng;

pub use error::{Error, Result};
