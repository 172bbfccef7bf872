//! From photon counts to refractive indices.
//!
//! The chain is: per-repetition transmittances → mean and SD (1/μ
//! normalization) → division by the air reference → calibration fit of
//! angle scans → index inversion at a fixed angle → linear error
//! propagation and the concentration-slope fit.

mod calibration;
mod concentration;
mod inversion;

pub use calibration::{
    fit_calibration, CalibrationResult, FitOptions, FitStart, FixedOptics, MeasuredCurve, ParameterBox,
    Termination, Weighting,
};
pub use concentration::{fit_concentration, ConcentrationModel};
pub use inversion::{invert_index, IndexInverter};

use crate::error::{Error, Result};
use crate::optics::{reflectance_spr, sensitivity, StackModel};

/// Forward model linking the air-normalized transmittance to the stack.
///
/// Dividing by an air run through the same prism leaves
/// `R_sp(n) / R_sp(air)`; the air reflectance is close to but not exactly
/// one in the usual scan windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `T_prism = R_sp(n)`; the air reference is treated as a perfect reflector.
    #[default]
    Unity,
    /// `T_prism = R_sp(n) / R_sp(n = 1)` at the same angle.
    AirReference,
}

impl Normalization {
    fn air_reflectance(&self, stack: &StackModel, theta_in: f64) -> Result<f64> {
        match self {
            Normalization::Unity => Ok(1.0),
            Normalization::AirReference => reflectance_spr(&stack.with_analyte_index(1.0)?, theta_in),
        }
    }

    /// Model value of `⟨T_prism⟩` for `stack` at `theta_in`.
    pub fn transmittance(&self, stack: &StackModel, theta_in: f64) -> Result<f64> {
        let r = reflectance_spr(stack, theta_in)?;
        Ok(r / self.air_reflectance(stack, theta_in)?)
    }

    /// `∂⟨T_prism⟩/∂n` by central difference, signed.
    pub fn sensitivity(&self, stack: &StackModel, theta_in: f64, delta_n: f64) -> Result<f64> {
        Ok(sensitivity(stack, theta_in, delta_n)? / self.air_reflectance(stack, theta_in)?)
    }
}

/// Repeated measurements of one quantity, e.g. `T_total(j)` for `j = 1..μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub values: Vec<f64>,
    pub label: String,
}

impl SampleSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            values,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Arithmetic mean and population SD (divides by `μ`, not `μ − 1`).
pub fn sample_mean_sd(series: &SampleSeries) -> Result<(f64, f64)> {
    let mu = series.values.len();
    if mu < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: mu });
    }
    let n = mu as f64;
    let mean = series.values.iter().sum::<f64>() / n;
    let var = series.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// `T_prism(j) = T_total(j) / ⟨T_total,air⟩`.
pub fn normalize_to_air(total: &SampleSeries, air_reference_mean: f64) -> Result<SampleSeries> {
    if !(air_reference_mean.is_finite() && air_reference_mean > 0.0) {
        return Err(Error::invalid(
            "air_reference_mean",
            format!("{air_reference_mean} must be positive"),
        ));
    }
    Ok(SampleSeries {
        values: total.values.iter().map(|v| v / air_reference_mean).collect(),
        label: total.label.clone(),
    })
}

/// Linear error propagation `Δn = ΔT_prism / |∂T_prism/∂n|`.
pub fn propagate_error(sd_t_prism: f64, sensitivity_abs: f64) -> Result<f64> {
    if !(sd_t_prism.is_finite() && sd_t_prism >= 0.0) {
        return Err(Error::invalid("sd_t_prism", format!("{sd_t_prism} must be non-negative")));
    }
    if !sensitivity_abs.is_finite() || sensitivity_abs < 0.0 {
        return Err(Error::invalid(
            "sensitivity_abs",
            format!("{sensitivity_abs} must be a finite magnitude"),
        ));
    }
    if sensitivity_abs == 0.0 {
        return Err(Error::ZeroSensitivity);
    }
    Ok(sd_t_prism / sensitivity_abs)
}
