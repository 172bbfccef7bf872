use crate::error::{Error, Result};

use super::{sample_mean_sd, SampleSeries};

/// Straight-line index model `n(C) = intercept + slope · C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationModel {
    pub intercept: f64,
    pub slope: f64,
    pub slope_uncertainty: f64,
    /// `false` when some series had zero spread and an unweighted fit was used.
    pub weighted: bool,
}

impl ConcentrationModel {
    pub fn index_at(&self, concentration: f64) -> f64 {
        self.intercept + self.slope * concentration
    }
}

/// Weighted least-squares line through `(C, ⟨n⟩)` with weights `1/sd²`.
///
/// The slope uncertainty is `sqrt(S / (S·Sxx − Sx²))` from the weight sums.
/// If any series has zero spread (noise-free input) the fit falls back to
/// ordinary least squares with the uncertainty taken from the residual
/// scatter.
pub fn fit_concentration(points: &[(f64, SampleSeries)]) -> Result<ConcentrationModel> {
    let stats = points
        .iter()
        .map(|(c, series)| sample_mean_sd(series).map(|(m, sd)| (*c, m, sd)))
        .collect::<Result<Vec<_>>>()?;
    if stats.iter().any(|(c, _, _)| !c.is_finite()) {
        return Err(Error::invalid("concentration", "non-finite concentration"));
    }
    let first = stats.first().map(|s| s.0);
    if stats.len() < 2 || stats.iter().all(|s| Some(s.0) == first) {
        return Err(Error::DegenerateConcentrations);
    }

    let weighted = stats.iter().all(|&(_, _, sd)| sd > 0.0);
    let weight = |sd: f64| if weighted { 1.0 / (sd * sd) } else { 1.0 };
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, sd) in &stats {
        let w = weight(sd);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let delta = s * sxx - sx * sx;
    let slope = (s * sxy - sx * sy) / delta;
    let intercept = (sxx * sy - sx * sxy) / delta;

    let slope_uncertainty = if weighted {
        (s / delta).sqrt()
    } else {
        let dof = stats.len().saturating_sub(2);
        if dof == 0 {
            0.0
        } else {
            let rss: f64 = stats
                .iter()
                .map(|&(x, y, _)| (y - intercept - slope * x).powi(2))
                .sum();
            (rss / dof as f64 * s / delta).sqrt()
        }
    };
    Ok(ConcentrationModel {
        intercept,
        slope,
        slope_uncertainty,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(label: &str, v: f64) -> SampleSeries {
        SampleSeries::new(label, vec![v; 4])
    }

    #[test]
    fn exact_line_recovered() {
        let points: Vec<_> = (0..=8)
            .map(|i| {
                let c = 0.25 * i as f64;
                (c, constant("n", 1.3284 + 1.933e-3 * c))
            })
            .collect();
        let model = fit_concentration(&points).unwrap();
        assert!((model.slope - 1.933e-3).abs() < 1e-15);
        assert!((model.intercept - 1.3284).abs() < 1e-14);
        assert!(!model.weighted);
        assert!(model.slope_uncertainty < 1e-12);
    }

    #[test]
    fn flat_pair_has_zero_slope() {
        let model = fit_concentration(&[(0.0, constant("a", 1.33)), (1.0, constant("b", 1.33))]).unwrap();
        assert_eq!(model.slope, 0.0);
    }

    #[test]
    fn identical_concentrations_rejected() {
        let err = fit_concentration(&[(0.5, constant("a", 1.33)), (0.5, constant("b", 1.34))]);
        assert_eq!(err, Err(Error::DegenerateConcentrations));
        assert_eq!(fit_concentration(&[]), Err(Error::DegenerateConcentrations));
    }

    #[test]
    fn weighted_uncertainty_formula() {
        // sd = 0.5 for every series -> w = 4; x = {0, 1, 2}
        let series = |m: f64| SampleSeries::new("s", vec![m - 0.5, m + 0.5]);
        let model = fit_concentration(&[(0.0, series(1.0)), (1.0, series(2.0)), (2.0, series(3.0))]).unwrap();
        assert!(model.weighted);
        assert!((model.slope - 1.0).abs() < 1e-14);
        let (s, sx, sxx): (f64, f64, f64) = (12.0, 12.0, 20.0);
        let expect = (s / (s * sxx - sx * sx)).sqrt();
        assert!((model.slope_uncertainty - expect).abs() < 1e-15);
    }
}
