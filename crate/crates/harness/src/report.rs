use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use plasmosense_core::estimation::{CalibrationResult, ConcentrationModel, Normalization, Termination, Weighting};
use serde_json::{json, Value};

use crate::config::{Experiment, ScenarioConfig};
use crate::error::{HarnessError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const SIGNIFICANT_DIGITS: i32 = 12;

/// Fixed-point decimal with at least twelve significant digits; `.` is
/// always the decimal separator. Non-finite values become empty fields.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).clamp(0, 60) as usize;
    format!("{x:.decimals$}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// One analyte at one setting (angle or user label).
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRow {
    pub label: String,
    pub n_analyte: Option<f64>,
    pub setting: f64,
    pub r_sp: Option<f64>,
    /// Forward-model `⟨T_prism⟩` under the run's normalization.
    pub model_t_prism: Option<f64>,
    pub mean_t_total: f64,
    pub mean_t_air: Option<f64>,
    pub mean_t_prism: Option<f64>,
    pub sd_t_total: f64,
    pub sd_t_prism: Option<f64>,
    pub sd_classical: Option<f64>,
    pub sd_quantum: Option<f64>,
    pub enhancement: Option<f64>,
    pub below_snl: bool,
    pub repetitions: usize,
}

impl TransmissionRow {
    const HEADER: [&'static str; 15] = [
        "label",
        "n_analyte",
        "",
        "r_sp",
        "model_t_prism",
        "mean_t_total",
        "mean_t_air",
        "mean_t_prism",
        "sd_t_total",
        "sd_t_prism",
        "sd_classical",
        "sd_quantum",
        "enhancement",
        "below_snl",
        "repetitions",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            opt(self.n_analyte),
            format_number(self.setting),
            opt(self.r_sp),
            opt(self.model_t_prism),
            format_number(self.mean_t_total),
            opt(self.mean_t_air),
            opt(self.mean_t_prism),
            format_number(self.sd_t_total),
            opt(self.sd_t_prism),
            opt(self.sd_classical),
            opt(self.sd_quantum),
            opt(self.enhancement),
            self.below_snl.to_string(),
            self.repetitions.to_string(),
        ]
    }
}

/// One concentration of the fixed-angle scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub concentration: f64,
    pub n_true: f64,
    pub mean_t_total: f64,
    pub mean_t_air: f64,
    pub mean_t_prism: f64,
    pub sd_t_total: f64,
    pub sd_t_prism: f64,
    pub mean_n: f64,
    pub dn_measured: f64,
    /// Signed `∂⟨T_prism⟩/∂n` at `mean_n`.
    pub sensitivity: f64,
    pub sd_classical: Option<f64>,
    pub sd_quantum: Option<f64>,
    pub enhancement: Option<f64>,
    pub dn_classical_lepm: Option<f64>,
    pub dn_quantum_lepm: Option<f64>,
    /// `dn_classical_lepm / dn_measured`.
    pub dn_ratio: Option<f64>,
    pub below_snl: bool,
}

impl ConcentrationRow {
    const HEADER: [&'static str; 17] = [
        "concentration",
        "n_true",
        "mean_t_total",
        "mean_t_air",
        "mean_t_prism",
        "sd_t_total",
        "sd_t_prism",
        "mean_n",
        "dn_measured",
        "sensitivity",
        "sd_classical",
        "sd_quantum",
        "enhancement",
        "dn_classical_lepm",
        "dn_quantum_lepm",
        "dn_ratio",
        "below_snl",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            format_number(self.concentration),
            format_number(self.n_true),
            format_number(self.mean_t_total),
            format_number(self.mean_t_air),
            format_number(self.mean_t_prism),
            format_number(self.sd_t_total),
            format_number(self.sd_t_prism),
            format_number(self.mean_n),
            format_number(self.dn_measured),
            format_number(self.sensitivity),
            opt(self.sd_classical),
            opt(self.sd_quantum),
            opt(self.enhancement),
            opt(self.dn_classical_lepm),
            opt(self.dn_quantum_lepm),
            opt(self.dn_ratio),
            self.below_snl.to_string(),
        ]
    }
}

/// Fit diagnostics per calibration point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub label: String,
    pub angle_deg: f64,
    pub measured: f64,
    pub sd: Option<f64>,
    pub fitted: f64,
    pub residual: f64,
}

impl ResidualRow {
    const HEADER: [&'static str; 6] = ["label", "angle_deg", "measured", "sd", "fitted", "residual"];

    fn record(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            format_number(self.angle_deg),
            format_number(self.measured),
            opt(self.sd),
            format_number(self.fitted),
            format_number(self.residual),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    /// `setting_name` heads the setting column, e.g. `angle_deg`.
    Transmission {
        setting_name: &'static str,
        rows: Vec<TransmissionRow>,
    },
    Concentration(Vec<ConcentrationRow>),
    Residuals(Vec<ResidualRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Transmission { rows, .. } => rows.len(),
            Table::Concentration(rows) => rows.len(),
            Table::Residuals(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn header(&self) -> Vec<&'static str> {
        match self {
            Table::Transmission { setting_name, .. } => {
                let mut h = TransmissionRow::HEADER.to_vec();
                h[2] = setting_name;
                h
            }
            Table::Concentration(_) => ConcentrationRow::HEADER.to_vec(),
            Table::Residuals(_) => ResidualRow::HEADER.to_vec(),
        }
    }

    fn records(&self) -> Vec<Vec<String>> {
        match self {
            Table::Transmission { rows, .. } => rows.iter().map(TransmissionRow::record).collect(),
            Table::Concentration(rows) => rows.iter().map(ConcentrationRow::record).collect(),
            Table::Residuals(rows) => rows.iter().map(ResidualRow::record).collect(),
        }
    }

    /// `(rows below the shot-noise limit, rows with a verdict)`.
    pub fn below_snl(&self) -> Option<(usize, usize)> {
        let verdicts: Vec<bool> = match self {
            Table::Transmission { rows, .. } => rows.iter().map(|r| r.below_snl).collect(),
            Table::Concentration(rows) => rows.iter().map(|r| r.below_snl).collect(),
            Table::Residuals(_) => return None,
        };
        Some((verdicts.iter().filter(|v| **v).count(), verdicts.len()))
    }
}

/// Per-repetition `T_total` for one series; `label == "air"` marks references.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub label: String,
    pub setting: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub tool_version: &'static str,
    pub zero_noise: bool,
    pub config: BTreeMap<&'static str, String>,
}

impl Provenance {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            config_hash: config.hash(),
            seed: config.seed,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: TOOL_VERSION,
            zero_noise: config.zero_noise,
            config: config.resolved(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: Experiment,
    pub table: Table,
    pub calibration: Option<CalibrationResult>,
    pub concentration_fit: Option<ConcentrationModel>,
    pub normalization: Normalization,
    pub assumptions: Vec<String>,
    pub provenance: Provenance,
    pub samples: Vec<SampleSet>,
}

impl RunReport {
    /// Errors if the run produced a calibration that failed to converge.
    pub fn status(&self) -> Result<()> {
        match &self.calibration {
            Some(c) if !c.converged => Err(HarnessError::NonConvergence(format!(
                "{:?} after {} iterations, residual rms {}",
                c.termination,
                c.iterations,
                format_number(c.residual_rms)
            ))),
            _ => Ok(()),
        }
    }

    /// Human-readable verdict lines.
    pub fn summary(&self) -> Vec<String> {
        let mut out = vec![format!("{}: {} rows", self.experiment, self.table.len())];
        if let Some((below, total)) = self.table.below_snl() {
            if total > 0 {
                out.push(format!(
                    "below shot-noise limit: {below}/{total} rows ({:.1}%)",
                    100.0 * below as f64 / total as f64
                ));
            }
        }
        if let Some(m) = &self.concentration_fit {
            out.push(format!(
                "dn/dC = {} +/- {} per unit concentration",
                format_number(m.slope),
                format_number(m.slope_uncertainty)
            ));
        }
        if let Some(c) = &self.calibration {
            out.push(format!(
                "eps_gold = {} + {}i, d = {} nm, rms = {} ({})",
                format_number(c.gold_permittivity.real_part()),
                format_number(c.gold_permittivity.imag_part()),
                format_number(c.gold_thickness),
                format_number(c.residual_rms),
                if c.converged { "converged" } else { "NOT converged" }
            ));
            for (label, n) in &c.analyte_indices {
                out.push(format!("n[{label}] = {}", format_number(*n)));
            }
        }
        for a in &self.assumptions {
            out.push(format!("assumption: {a}"));
        }
        out
    }

    fn metadata(&self) -> Value {
        let normalization = match self.normalization {
            Normalization::AirReference => "air_reference",
            Normalization::Unity => "unity",
        };
        let mut meta = json!({
            "tool": "plasmosense",
            "tool_version": self.provenance.tool_version,
            "experiment": self.experiment.as_str(),
            "config_hash": self.provenance.config_hash,
            "seed": self.provenance.seed,
            "timestamp_unix": self.provenance.timestamp_unix,
            "zero_noise": self.provenance.zero_noise,
            "normalization": normalization,
            "sd_normalization": "population (divide by repetitions)",
            "rows": self.table.len(),
            "assumptions": self.assumptions,
            "config": self.provenance.config,
        });
        if let Some((below, total)) = self.table.below_snl() {
            meta["below_snl_rows"] = json!(below);
            meta["verdict_rows"] = json!(total);
        }
        if let Some(c) = &self.calibration {
            meta["calibration"] = json!({
                "gold_eps_real": c.gold_permittivity.real_part(),
                "gold_eps_imag": c.gold_permittivity.imag_part(),
                "gold_thickness_nm": c.gold_thickness,
                "analyte_indices": c.analyte_indices,
                "residual_rms": c.residual_rms,
                "converged": c.converged,
                "iterations": c.iterations,
                "termination": match c.termination {
                    Termination::ExactFit => "exact_fit",
                    Termination::CostConverged => "cost_converged",
                    Termination::Stalled => "stalled",
                    Termination::IterationLimit => "iteration_limit",
                },
                "weighting": match c.weighting {
                    Weighting::InverseVariance => "inverse_variance",
                    Weighting::Uniform => "uniform",
                },
            });
        }
        if let Some(m) = &self.concentration_fit {
            meta["concentration_fit"] = json!({
                "slope": m.slope,
                "slope_uncertainty": m.slope_uncertainty,
                "intercept": m.intercept,
                "weighted": m.weighted,
            });
        }
        meta
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_table(path: &Path, header: &[&str], records: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Sidecar path for `table.csv`: `table.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Writes the table to `path` and its metadata next to it.
pub fn emit_csv(report: &RunReport, path: &Path) -> Result<PathBuf> {
    write_table(path, &report.table.header(), &report.table.records())?;
    let sidecar = sidecar_path(path);
    let mut w = create(&sidecar)?;
    serde_json::to_writer_pretty(&mut w, &report.metadata())
        .map_err(|e| HarnessError::io(&sidecar, e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::io(&sidecar, e))?;
    Ok(sidecar)
}

/// Long-format per-repetition samples, readable by `analyze`.
pub fn emit_samples(report: &RunReport, path: &Path) -> Result<()> {
    let records: Vec<Vec<String>> = report
        .samples
        .iter()
        .flat_map(|s| {
            s.values
                .iter()
                .map(move |v| vec![s.label.clone(), format_number(s.setting), format_number(*v)])
        })
        .collect();
    write_table(path, &["label", "setting", "t_total"], &records)
}
