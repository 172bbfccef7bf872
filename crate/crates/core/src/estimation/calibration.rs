//! Simultaneous fit of measured angle scans to the Kretschmann reflectance.
//!
//! Shared parameters are the gold permittivity `(ε', ε'')` and thickness
//! `d`; every curve adds its own analyte index. The minimizer is a
//! box-constrained Levenberg–Marquardt iteration on parameters rescaled to
//! the unit box, with a central-difference Jacobian.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::Normalization;
use crate::error::{Error, Result};
use crate::optics::{ComplexPermittivity, StackModel};

const SHARED: usize = 3;

/// Optical constants held fixed during calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedOptics {
    pub prism_index: f64,
    pub wavelength: f64,
}

/// Measured `⟨T_prism⟩` over angle for one analyte, with optional per-point SDs.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredCurve {
    pub label: String,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    pub sd: Option<Vec<f64>>,
}

impl MeasuredCurve {
    pub fn new(label: impl Into<String>, angles: Vec<f64>, values: Vec<f64>, sd: Option<Vec<f64>>) -> Result<Self> {
        let label = label.into();
        if angles.len() != values.len() || sd.as_ref().is_some_and(|s| s.len() != angles.len()) {
            return Err(Error::invalid("curve", format!("`{label}`: column lengths differ")));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "curve",
                format!("`{label}`: angles must be strictly increasing"),
            ));
        }
        if angles.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("curve", format!("`{label}`: non-finite value")));
        }
        if let Some(s) = &sd {
            if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid("curve", format!("`{label}`: SDs must be non-negative")));
            }
        }
        Ok(Self {
            label,
            angles,
            values,
            sd,
        })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Search box; every range is inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBox {
    pub eps_real: (f64, f64),
    pub eps_imag: (f64, f64),
    pub thickness: (f64, f64),
    pub index: (f64, f64),
}

impl Default for ParameterBox {
    fn default() -> Self {
        Self {
            eps_real: (-30.0, -10.0),
            eps_imag: (0.1, 3.0),
            thickness: (40.0, 80.0),
            index: (1.30, 1.36),
        }
    }
}

impl ParameterBox {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("bounds.eps_real", self.eps_real),
            ("bounds.eps_imag", self.eps_imag),
            ("bounds.thickness", self.thickness),
            ("bounds.index", self.index),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(name, format!("[{lo}, {hi}] is not well ordered")));
            }
        }
        if self.eps_real.1 >= 0.0 {
            return Err(Error::invalid("bounds.eps_real", "upper bound must be negative (metal)"));
        }
        if self.eps_imag.0 < 0.0 {
            return Err(Error::invalid("bounds.eps_imag", "lower bound must be non-negative"));
        }
        if self.thickness.0 <= 0.0 {
            return Err(Error::invalid("bounds.thickness", "lower bound must be positive"));
        }
        if self.index.0 < 1.0 {
            return Err(Error::invalid("bounds.index", "lower bound must be at least 1"));
        }
        Ok(())
    }
}

/// Initial guess. `curve_indices` overrides `index` per curve label.
#[derive(Debug, Clone, PartialEq)]
pub struct FitStart {
    pub eps_real: f64,
    pub eps_imag: f64,
    pub thickness: f64,
    pub index: f64,
    pub curve_indices: BTreeMap<String, f64>,
}

impl Default for FitStart {
    fn default() -> Self {
        Self {
            eps_real: -20.0,
            eps_imag: 1.0,
            thickness: 55.0,
            index: 1.33,
            curve_indices: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub relative_tolerance: f64,
    /// Largest unweighted RMS residual accepted as a converged calibration.
    pub residual_threshold: f64,
    pub normalization: Normalization,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            relative_tolerance: 1e-10,
            residual_threshold: 0.02,
            normalization: Normalization::Unity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Residuals divided by the supplied per-point SD.
    InverseVariance,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Residuals vanish to rounding.
    ExactFit,
    /// Relative cost decrease fell below tolerance.
    CostConverged,
    /// No improving step exists at any damping; local minimum.
    Stalled,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub gold_permittivity: ComplexPermittivity,
    pub gold_thickness: f64,
    pub analyte_indices: BTreeMap<String, f64>,
    /// Unweighted RMS of `measured − model` over all points.
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub termination: Termination,
    pub weighting: Weighting,
    /// Forward model the curves were fitted with; inversion reuses it.
    pub normalization: Normalization,
    pub optics: FixedOptics,
}

impl CalibrationResult {
    /// Calibrated stack carrying the given analyte.
    pub fn stack(&self, analyte_index: f64) -> Result<StackModel> {
        StackModel::new(
            self.optics.prism_index,
            self.gold_permittivity,
            self.gold_thickness,
            analyte_index,
            self.optics.wavelength,
        )
    }
}

struct Problem<'a> {
    curves: Vec<&'a MeasuredCurve>,
    weights: Vec<Vec<f64>>,
    lower: Vec<f64>,
    span: Vec<f64>,
    optics: FixedOptics,
    normalization: Normalization,
}

impl Problem<'_> {
    fn params(&self, unit: &DVector<f64>) -> Vec<f64> {
        unit.iter()
            .enumerate()
            .map(|(i, u)| self.lower[i] + u * self.span[i])
            .collect()
    }

    fn stacks(&self, p: &[f64]) -> Result<Vec<StackModel>> {
        let eps = ComplexPermittivity::new(p[0], p[1])?;
        (0..self.curves.len())
            .map(|c| StackModel::new(self.optics.prism_index, eps, p[2], p[SHARED + c], self.optics.wavelength))
            .collect()
    }

    /// Measured minus model, unweighted.
    fn raw_residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        let stacks = self.stacks(p)?;
        let mut out = Vec::new();
        for (curve, stack) in self.curves.iter().zip(&stacks) {
            for (&angle, &value) in curve.angles.iter().zip(&curve.values) {
                out.push(value - self.normalization.transmittance(stack, angle)?);
            }
        }
        Ok(out)
    }

    fn residuals(&self, unit: &DVector<f64>) -> Result<DVector<f64>> {
        let raw = self.raw_residuals(&self.params(unit))?;
        let w = self.weights.iter().flatten();
        Ok(DVector::from_iterator(raw.len(), raw.iter().zip(w).map(|(r, w)| r * w)))
    }

    /// Jacobian of the weighted model (not the residual) in unit coordinates.
    fn jacobian(&self, unit: &DVector<f64>, m: usize) -> Result<DMatrix<f64>> {
        const H: f64 = 1e-7;
        let n = unit.len();
        let mut jac = DMatrix::zeros(m, n);
        for j in 0..n {
            let up = (unit[j] + H).min(1.0);
            let down = (unit[j] - H).max(0.0);
            let mut plus = unit.clone();
            plus[j] = up;
            let mut minus = unit.clone();
            minus[j] = down;
            // residual = w(y - f), so ∂f = -(∂residual)
            let diff = (self.residuals(&minus)? - self.residuals(&plus)?) / (up - down);
            jac.set_column(j, &diff);
        }
        Ok(jac)
    }
}

/// Fits gold permittivity, thickness and one analyte index per curve.
///
/// Curves are processed in label order, so the result does not depend on
/// the order of `curves`. Hitting the iteration cap or exceeding the
/// residual threshold yields `converged == false` rather than an error.
pub fn fit_calibration(
    curves: &[MeasuredCurve],
    fixed: FixedOptics,
    bounds: &ParameterBox,
    start: &FitStart,
    options: &FitOptions,
) -> Result<CalibrationResult> {
    if curves.is_empty() {
        return Err(Error::UnderDetermined("no curves supplied".into()));
    }
    bounds.validate()?;
    let mut sorted: Vec<&MeasuredCurve> = curves.iter().collect();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    if let Some(w) = sorted.windows(2).find(|w| w[0].label == w[1].label) {
        return Err(Error::invalid("curves", format!("duplicate label `{}`", w[0].label)));
    }
    let n_params = SHARED + sorted.len();
    for c in &sorted {
        if c.len() < n_params {
            return Err(Error::UnderDetermined(format!(
                "curve `{}` has {} points for {} free parameters",
                c.label,
                c.len(),
                n_params
            )));
        }
    }

    let weighted = sorted
        .iter()
        .all(|c| c.sd.as_ref().is_some_and(|s| s.iter().all(|&v| v > 0.0)));
    let weighting = if weighted {
        Weighting::InverseVariance
    } else {
        Weighting::Uniform
    };
    let weights: Vec<Vec<f64>> = sorted
        .iter()
        .map(|c| match (&c.sd, weighting) {
            (Some(sd), Weighting::InverseVariance) => sd.iter().map(|s| 1.0 / s).collect(),
            _ => vec![1.0; c.len()],
        })
        .collect();

    let mut lower = vec![bounds.eps_real.0, bounds.eps_imag.0, bounds.thickness.0];
    let mut upper = vec![bounds.eps_real.1, bounds.eps_imag.1, bounds.thickness.1];
    let mut init = vec![start.eps_real, start.eps_imag, start.thickness];
    for c in &sorted {
        lower.push(bounds.index.0);
        upper.push(bounds.index.1);
        init.push(*start.curve_indices.get(&c.label).unwrap_or(&start.index));
    }
    let span: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| u - l).collect();
    let problem = Problem {
        curves: sorted,
        weights,
        lower,
        span,
        optics: fixed,
        normalization: options.normalization,
    };

    let unit0 = DVector::from_iterator(
        n_params,
        init.iter()
            .enumerate()
            .map(|(i, p)| ((p - problem.lower[i]) / problem.span[i]).clamp(0.0, 1.0)),
    );
    let (unit, iterations, termination) = levenberg_marquardt(&problem, unit0, options)?;

    let p = problem.params(&unit);
    let raw = problem.raw_residuals(&p)?;
    let residual_rms = (raw.iter().map(|r| r * r).sum::<f64>() / raw.len() as f64).sqrt();
    let analyte_indices = problem
        .curves
        .iter()
        .enumerate()
        .map(|(c, curve)| (curve.label.clone(), p[SHARED + c]))
        .collect();
    Ok(CalibrationResult {
        gold_permittivity: ComplexPermittivity::new(p[0], p[1])?,
        gold_thickness: p[2],
        analyte_indices,
        residual_rms,
        converged: termination != Termination::IterationLimit && residual_rms <= options.residual_threshold,
        iterations,
        termination,
        weighting,
        normalization: options.normalization,
        optics: fixed,
    })
}

fn levenberg_marquardt(
    problem: &Problem<'_>,
    mut unit: DVector<f64>,
    options: &FitOptions,
) -> Result<(DVector<f64>, usize, Termination)> {
    let mut residual = problem.residuals(&unit)?;
    let m = residual.len();
    let exact = 1e-24 * m as f64;
    let mut cost = residual.norm_squared();
    let mut lambda = 1e-3;

    for iteration in 0..options.max_iterations {
        if cost <= exact {
            return Ok((unit, iteration, Termination::ExactFit));
        }
        let jac = problem.jacobian(&unit, m)?;
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &residual;
        loop {
            let mut damped = jtj.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(chol) => chol.solve(&jtr),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        return Ok((unit, iteration + 1, Termination::Stalled));
                    }
                    continue;
                }
            };
            let trial = (&unit + &step).map(|u| u.clamp(0.0, 1.0));
            let trial_residual = problem.residuals(&trial)?;
            let trial_cost = trial_residual.norm_squared();
            if trial_cost < cost {
                let decrease = (cost - trial_cost) / cost;
                unit = trial;
                residual = trial_residual;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                if decrease < options.relative_tolerance {
                    return Ok((unit, iteration + 1, Termination::CostConverged));
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                let termination = if cost <= exact {
                    Termination::ExactFit
                } else {
                    Termination::Stalled
                };
                return Ok((unit, iteration + 1, termination));
            }
        }
    }
    let termination = if cost <= exact {
        Termination::ExactFit
    } else {
        Termination::IterationLimit
    };
    Ok((unit, options.max_iterations, termination))
}
