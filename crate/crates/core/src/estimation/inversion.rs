use crate::error::{Error, Result};
use crate::optics::{linspace, StackModel};

use super::{CalibrationResult, Normalization};

const SCAN_POINTS: usize = 65;
const INDEX_TOLERANCE: f64 = 1e-10;

/// Inverts `T_prism(n) = T` at a fixed angle on a bracket where the model
/// is strictly monotone in `n`. Monotonicity is checked once at
/// construction, so the inverter can be reused across many observations.
#[derive(Debug, Clone)]
pub struct IndexInverter {
    stack: StackModel,
    normalization: Normalization,
    theta_in: f64,
    lo: f64,
    hi: f64,
    r_lo: f64,
    r_hi: f64,
}

impl IndexInverter {
    pub fn new(stack: &StackModel, theta_in: f64, bracket: (f64, f64)) -> Result<Self> {
        Self::with_normalization(stack, theta_in, bracket, Normalization::Unity)
    }

    pub fn with_normalization(
        stack: &StackModel,
        theta_in: f64,
        bracket: (f64, f64),
        normalization: Normalization,
    ) -> Result<Self> {
        let (lo, hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && 1.0 <= lo && lo < hi) {
            return Err(Error::invalid("n_bracket", format!("[{lo}, {hi}] is not a valid index interval")));
        }
        let grid = linspace(lo, hi, SCAN_POINTS);
        let values = grid
            .iter()
            .map(|&n| normalization.transmittance(&stack.with_analyte_index(n)?, theta_in))
            .collect::<Result<Vec<f64>>>()?;
        let rising = values[1] > values[0];
        let monotone = |a: f64, b: f64| if rising { b > a } else { b < a };
        if let Some(i) = (1..SCAN_POINTS).find(|&i| !monotone(values[i - 1], values[i])) {
            // a flat first step has no turning point; report the lower end
            let turn = if values[1] == values[0] { lo } else { grid[i - 1] };
            return Err(Error::AmbiguousBracket { lo, turn, hi });
        }
        Ok(Self {
            stack: *stack,
            normalization,
            theta_in,
            lo,
            hi,
            r_lo: values[0],
            r_hi: values[SCAN_POINTS - 1],
        })
    }

    /// Reflectance range attained on the bracket, ascending.
    pub fn range(&self) -> (f64, f64) {
        (self.r_lo.min(self.r_hi), self.r_lo.max(self.r_hi))
    }

    pub fn invert(&self, observed: f64) -> Result<f64> {
        let (min, max) = self.range();
        if !(min..=max).contains(&observed) {
            return Err(Error::OutOfRange { observed, min, max });
        }
        let rising = self.r_hi > self.r_lo;
        let (mut a, mut b) = (self.lo, self.hi);
        while b - a > INDEX_TOLERANCE {
            let mid = 0.5 * (a + b);
            let r = self
                .normalization
                .transmittance(&self.stack.with_analyte_index(mid)?, self.theta_in)?;
            if (r < observed) == rising {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Analyte index whose calibrated `T_prism` at `theta_in` equals `t_prism_observed`.
pub fn invert_index(
    calibration: &CalibrationResult,
    theta_in: f64,
    t_prism_observed: f64,
    n_bracket: (f64, f64),
) -> Result<f64> {
    let stack = calibration.stack(n_bracket.0.max(1.0))?;
    IndexInverter::with_normalization(&stack, theta_in, n_bracket, calibration.normalization)?
        .invert(t_prism_observed)
}
