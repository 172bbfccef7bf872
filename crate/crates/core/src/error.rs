use thiserror::Error;

use crate::optics::Layer;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incidence angle {0}° outside [0°, 90°)")]
    AngleOutOfRange(f64),

    #[error("reflection coefficient needs two distinct layers, got {0:?} twice")]
    SameLayer(Layer),

    #[error("no interior reflectance minimum in [{lo}°, {hi}°]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("reflectance is not unimodal in [{lo}°, {hi}°]: {count} local minima")]
    NotUnimodal { lo: f64, hi: f64, count: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("observed transmittance {observed} outside attained range [{min}, {max}]")]
    OutOfRange { observed: f64, min: f64, max: f64 },

    #[error(
        "reflectance is not monotone in index on [{lo}, {hi}]; \
         candidate branches are [{lo}, {turn}] and [{turn}, {hi}]"
    )]
    AmbiguousBracket { lo: f64, turn: f64, hi: f64 },

    #[error("index sensitivity is zero; linear error propagation diverges")]
    ZeroSensitivity,

    #[error("under-determined fit: {0}")]
    UnderDetermined(String),

    #[error("at least two distinct concentrations are required")]
    DegenerateConcentrations,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
