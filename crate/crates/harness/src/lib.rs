//! Config-driven runs of the angle and concentration experiments with
//! seeded photon counting, plus calibration and analysis of CSV data.

pub mod config;
pub mod error;
pub mod input;
pub mod report;
pub mod scenario;

pub use config::{Experiment, ScenarioConfig};
pub use error::{HarnessError, Result};
pub use report::{emit_csv, emit_samples, RunReport, Table};
pub use scenario::{run_analyze, run_angle_scan, run_calibrate, run_concentration_scan};
