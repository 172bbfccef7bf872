use std::path::Path;

use plasmosense_core::estimation::MeasuredCurve;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::report::SampleSet;

#[derive(Debug, Deserialize)]
struct CurvePoint {
    label: String,
    angle_deg: f64,
    #[serde(alias = "t_prism")]
    mean_t_prism: f64,
    #[serde(default, alias = "sd")]
    sd_t_prism: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct Sample {
    label: String,
    setting: f64,
    t_total: f64,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Rows of `path` with their line numbers. Extra columns are ignored.
fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<(u64, T)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::io(path, io),
            other => parse_error(path, 1, format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    if headers.iter().all(str::is_empty) {
        return Err(parse_error(path, 1, "empty file: header row expected"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_error(path, line, e.to_string()))?;
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(parse_error(path, 2, "no data rows"));
    }
    Ok(rows)
}

/// Calibration curves grouped by label in order of first appearance.
///
/// Columns: `label`, `angle_deg`, `mean_t_prism` (or `t_prism`) and an
/// optional `sd_t_prism` (or `sd`). A curve is weighted only if every one
/// of its points carries an SD.
pub fn read_calibration_curves(path: &Path) -> Result<Vec<MeasuredCurve>> {
    let mut groups: Vec<(String, u64, Vec<CurvePoint>)> = Vec::new();
    for (line, p) in read_rows::<CurvePoint>(path)? {
        if p.label == "air" {
            continue;
        }
        match groups.iter_mut().find(|g| g.0 == p.label) {
            Some(g) => g.2.push(p),
            None => groups.push((p.label.clone(), line, vec![p])),
        }
    }
    if groups.is_empty() {
        return Err(parse_error(path, 2, "no non-air rows"));
    }
    groups
        .into_iter()
        .map(|(label, line, points)| {
            let sd = points
                .iter()
                .map(|p| p.sd_t_prism)
                .collect::<Option<Vec<f64>>>();
            let angles = points.iter().map(|p| p.angle_deg).collect();
            let values = points.iter().map(|p| p.mean_t_prism).collect();
            MeasuredCurve::new(label.as_str(), angles, values, sd)
                .map_err(|e| parse_error(path, line, format!("curve `{label}`: {e}")))
        })
        .collect()
}

/// Per-repetition samples grouped by `(label, setting)` in order of first
/// appearance.
pub fn read_samples(path: &Path) -> Result<Vec<SampleSet>> {
    let mut groups: Vec<SampleSet> = Vec::new();
    for (line, s) in read_rows::<Sample>(path)? {
        if !(s.t_total.is_finite() && s.t_total >= 0.0) {
            return Err(parse_error(path, line, format!("t_total {} must be non-negative", s.t_total)));
        }
        match groups
            .iter_mut()
            .find(|g| g.label == s.label && g.setting == s.setting)
        {
            Some(g) => g.values.push(s.t_total),
            None => groups.push(SampleSet {
                label: s.label,
                setting: s.setting,
                values: vec![s.t_total],
            }),
        }
    }
    Ok(groups)
}
