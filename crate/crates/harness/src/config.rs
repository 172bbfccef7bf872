//! Flat `key = value` scenario files.
//!
//! Blank lines and `#` comments are ignored. Every key is optional except
//! `prism_index`; unknown or repeated keys are rejected with their line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use plasmosense_core::estimation::{FitOptions, FitStart, FixedOptics, Normalization, ParameterBox};
use plasmosense_core::optics::{ComplexPermittivity, StackModel};
use plasmosense_core::photon::{ChannelModel, ProbeModel, SamplingPlan};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    AngleScan,
    ConcentrationScan,
    Calibrate,
    Analyze,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::AngleScan => "angle_scan",
            Experiment::ConcentrationScan => "concentration_scan",
            Experiment::Calibrate => "calibrate",
            Experiment::Analyze => "analyze",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "angle_scan" => Ok(Experiment::AngleScan),
            "concentration_scan" => Ok(Experiment::ConcentrationScan),
            "calibrate" => Ok(Experiment::Calibrate),
            "analyze" => Ok(Experiment::Analyze),
            other => Err(format!(
                "unknown experiment `{other}` (angle_scan, concentration_scan, calibrate, analyze)"
            )),
        }
    }
}

/// Unmeasured parameters; listed as assumptions whenever defaulted.
const UNSTATED: &[&str] = &["prism_index", "t_before", "t_after", "heralding_efficiency"];

const KEYS: &[&str] = &[
    "experiment",
    "prism_index",
    "wavelength_nm",
    "gold_eps_real",
    "gold_eps_imag",
    "gold_thickness_nm",
    "probe",
    "heralding_efficiency",
    "mean_photon_number",
    "t_before",
    "t_after",
    "detector_efficiency",
    "bypass_prism",
    "trials",
    "repetitions",
    "seed",
    "zero_noise",
    "angle_min_deg",
    "angle_max_deg",
    "angle_steps",
    "analyte_labels",
    "analyte_indices",
    "fixed_angle_deg",
    "concentrations",
    "base_index",
    "index_slope",
    "index_bracket",
    "normalization",
    "fit_eps_real_bounds",
    "fit_eps_imag_bounds",
    "fit_thickness_bounds",
    "fit_index_bounds",
    "fit_eps_real_start",
    "fit_eps_imag_start",
    "fit_thickness_start",
    "fit_index_start",
    "fit_max_iterations",
    "fit_relative_tolerance",
    "fit_residual_threshold",
    "output_dir",
    "input_csv",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub experiment: Option<Experiment>,
    pub prism_index: f64,
    pub wavelength_nm: f64,
    pub gold_eps_real: f64,
    pub gold_eps_imag: f64,
    pub gold_thickness_nm: f64,
    pub probe: ProbeModel,
    pub t_before: f64,
    pub t_after: f64,
    pub detector_efficiency: f64,
    /// Treat the prism as a perfect transmitter (`t_prism = 1`).
    pub bypass_prism: bool,
    pub trials: u64,
    pub repetitions: usize,
    pub seed: u64,
    /// Analytic expectations instead of sampled counts.
    pub zero_noise: bool,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub angle_steps: usize,
    /// `(label, index)` per analyte in the angle scan.
    pub analytes: Vec<(String, f64)>,
    pub fixed_angle_deg: f64,
    pub concentrations: Vec<f64>,
    pub base_index: f64,
    pub index_slope: f64,
    pub index_bracket: (f64, f64),
    pub normalization: Normalization,
    pub fit_bounds: ParameterBox,
    pub fit_start: FitStart,
    pub fit_options: FitOptions,
    pub output_dir: Option<PathBuf>,
    pub input_csv: Option<PathBuf>,
    defaulted: BTreeSet<&'static str>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Source {
    entries: BTreeMap<String, Entry>,
    defaulted: BTreeSet<&'static str>,
}

impl Source {
    fn raw(&mut self, key: &'static str) -> Option<(usize, String)> {
        match self.entries.get(key) {
            Some(e) => Some((e.line, e.value.clone())),
            None => {
                self.defaulted.insert(key);
                None
            }
        }
    }

    fn get<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|e| bad(key, line, format!("`{v}`: {e}"))),
        }
    }

    fn list<T: FromStr>(&mut self, key: &'static str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some((_, v)) if v.trim().is_empty() => Ok(Vec::new()),
            Some((line, v)) => v
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse().map_err(|e| bad(key, line, format!("`{item}`: {e}")))
                })
                .collect(),
        }
    }

    fn pair(&mut self, key: &'static str, default: (f64, f64)) -> Result<(f64, f64)> {
        let line = self.entries.get(key).map(|e| e.line);
        let v = self.list(key, vec![default.0, default.1])?;
        match v.as_slice() {
            [a, b] if a < b => Ok((*a, *b)),
            _ => Err(bad(key, line.unwrap_or(0), "expected `low, high` with low < high")),
        }
    }

    fn required<T: FromStr>(&mut self, key: &'static str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Err(HarnessError::config(key, "required key is missing")),
            Some(e) => {
                let line = e.line;
                e.value.parse().map_err(|err| bad(key, line, format!("`{}`: {err}", e.value)))
            }
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }
}

fn bad(field: &str, line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field: field.to_string(),
        line: (line > 0).then_some(line),
        message: message.into(),
    }
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    match s {
        "air_reference" => Ok(Normalization::AirReference),
        "unity" => Ok(Normalization::Unity),
        other => Err(format!("unknown normalization `{other}` (air_reference, unity)")),
    }
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::AirReference => "air_reference",
        Normalization::Unity => "unity",
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        text.parse()
    }

    /// The reference scenario with the given prism index.
    pub fn paper_default(prism_index: f64) -> Self {
        format!("prism_index = {prism_index}")
            .parse()
            .expect("default scenario is valid")
    }

    fn from_source(mut src: Source) -> Result<Self> {
        let experiment = match src.raw("experiment") {
            None => None,
            Some((line, v)) => Some(v.parse().map_err(|e: String| bad("experiment", line, e))?),
        };
        let prism_index: f64 = src.required("prism_index")?;
        let wavelength_nm = src.get("wavelength_nm", 799.0)?;
        let gold_eps_real = src.get("gold_eps_real", -18.2484)?;
        let gold_eps_imag = src.get("gold_eps_imag", 0.8096)?;
        let gold_thickness_nm = src.get("gold_thickness_nm", 57.41)?;

        let probe_kind: String = src.get("probe", "heralded".to_string())?;
        let heralding_efficiency = src.get("heralding_efficiency", 1.0)?;
        let mean_photon_number = src.get("mean_photon_number", 1.0)?;
        let probe = match probe_kind.as_str() {
            "heralded" => ProbeModel::heralded(heralding_efficiency)
                .map_err(|e| bad("heralding_efficiency", src.line("heralding_efficiency").unwrap_or(0), e.to_string()))?,
            "coherent" => ProbeModel::coherent(mean_photon_number)
                .map_err(|e| bad("mean_photon_number", src.line("mean_photon_number").unwrap_or(0), e.to_string()))?,
            other => {
                return Err(bad(
                    "probe",
                    src.line("probe").unwrap_or(0),
                    format!("unknown probe `{other}` (heralded, coherent)"),
                ))
            }
        };

        let t_before = src.get("t_before", 0.8)?;
        let t_after = src.get("t_after", 0.9)?;
        let detector_efficiency = src.get("detector_efficiency", 0.5)?;
        let bypass_prism = src.get("bypass_prism", false)?;
        let trials = src.get("trials", 10_000u64)?;
        let repetitions = src.get("repetitions", 1_000usize)?;
        let seed = src.get("seed", 1u64)?;
        let zero_noise = src.get("zero_noise", false)?;

        let angle_min_deg = src.get("angle_min_deg", 66.5)?;
        let angle_max_deg = src.get("angle_max_deg", 69.0)?;
        let angle_steps = src.get("angle_steps", 26usize)?;
        let labels_line = src.line("analyte_labels");
        let indices = src.list("analyte_indices", vec![1.3284, 1.3325])?;
        let labels: Vec<String> = src.list("analyte_labels", vec!["water".to_string(), "bsa_2pct".to_string()])?;
        let labels = if labels_line.is_none() && indices.len() != 2 {
            (0..indices.len()).map(|i| format!("analyte_{i}")).collect()
        } else {
            labels
        };
        if labels.len() != indices.len() {
            return Err(bad(
                "analyte_labels",
                labels_line.unwrap_or(0),
                format!("{} labels for {} analyte_indices", labels.len(), indices.len()),
            ));
        }
        if let Some(dup) = labels.iter().enumerate().find(|(i, l)| labels[..*i].contains(l)) {
            return Err(bad("analyte_labels", labels_line.unwrap_or(0), format!("duplicate label `{}`", dup.1)));
        }
        if let Some(l) = labels.iter().find(|l| l.is_empty() || *l == "air") {
            return Err(bad("analyte_labels", labels_line.unwrap_or(0), format!("reserved or empty label `{l}`")));
        }
        let analytes = labels.into_iter().zip(indices).collect();

        let fixed_angle_deg = src.get("fixed_angle_deg", 67.5)?;
        let concentrations = src.list("concentrations", (0..=8).map(|i| 0.25 * i as f64).collect())?;
        let base_index = src.get("base_index", 1.3284)?;
        let index_slope = src.get("index_slope", 1.933e-3)?;
        let index_bracket = src.pair("index_bracket", (1.3275, 1.345))?;
        let normalization = match src.raw("normalization") {
            None => Normalization::AirReference,
            Some((line, v)) => parse_normalization(&v).map_err(|e| bad("normalization", line, e))?,
        };

        let defaults = ParameterBox::default();
        let fit_bounds = ParameterBox {
            eps_real: src.pair("fit_eps_real_bounds", defaults.eps_real)?,
            eps_imag: src.pair("fit_eps_imag_bounds", defaults.eps_imag)?,
            thickness: src.pair("fit_thickness_bounds", defaults.thickness)?,
            index: src.pair("fit_index_bounds", defaults.index)?,
        };
        let start = FitStart::default();
        let fit_start = FitStart {
            eps_real: src.get("fit_eps_real_start", start.eps_real)?,
            eps_imag: src.get("fit_eps_imag_start", start.eps_imag)?,
            thickness: src.get("fit_thickness_start", start.thickness)?,
            index: src.get("fit_index_start", start.index)?,
            curve_indices: BTreeMap::new(),
        };
        let options = FitOptions::default();
        let fit_options = FitOptions {
            max_iterations: src.get("fit_max_iterations", options.max_iterations)?,
            relative_tolerance: src.get("fit_relative_tolerance", options.relative_tolerance)?,
            residual_threshold: src.get("fit_residual_threshold", options.residual_threshold)?,
            normalization,
        };
        let output_dir = src.raw("output_dir").map(|(_, v)| PathBuf::from(v));
        let input_csv = src.raw("input_csv").map(|(_, v)| PathBuf::from(v));

        let config = ScenarioConfig {
            experiment,
            prism_index,
            wavelength_nm,
            gold_eps_real,
            gold_eps_imag,
            gold_thickness_nm,
            probe,
            t_before,
            t_after,
            detector_efficiency,
            bypass_prism,
            trials,
            repetitions,
            seed,
            zero_noise,
            angle_min_deg,
            angle_max_deg,
            angle_steps,
            analytes,
            fixed_angle_deg,
            concentrations,
            base_index,
            index_slope,
            index_bracket,
            normalization,
            fit_bounds,
            fit_start,
            fit_options,
            output_dir,
            input_csv,
            defaulted: src.defaulted,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks every field against the core type invariants.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &'static str| move |e: plasmosense_core::Error| HarnessError::config(name, e.to_string());
        self.truth_stack(self.analytes.first().map_or(1.3284, |a| a.1))
            .map_err(field("stack"))?;
        for (label, n) in &self.analytes {
            if !(n.is_finite() && *n >= 1.0) {
                return Err(HarnessError::config(
                    "analyte_indices",
                    format!("index {n} for `{label}` must be at least 1"),
                ));
            }
        }
        self.channel().map_err(field("channel"))?;
        self.plan().map_err(field("repetitions"))?;
        if !(0.0..90.0).contains(&self.angle_min_deg) || !(0.0..90.0).contains(&self.angle_max_deg) {
            return Err(HarnessError::config("angle_min_deg", "angles must lie in [0, 90)"));
        }
        if self.angle_steps > 0 && self.angle_max_deg <= self.angle_min_deg {
            return Err(HarnessError::config("angle_max_deg", "must exceed angle_min_deg"));
        }
        if self.angle_steps == 1 {
            return Err(HarnessError::config("angle_steps", "need 0 or at least 2 steps"));
        }
        if !(0.0..90.0).contains(&self.fixed_angle_deg) {
            return Err(HarnessError::config("fixed_angle_deg", "must lie in [0, 90)"));
        }
        if self.concentrations.iter().any(|c| !c.is_finite()) {
            return Err(HarnessError::config("concentrations", "non-finite value"));
        }
        if !(self.index_slope.is_finite() && self.base_index.is_finite()) {
            return Err(HarnessError::config("index_slope", "non-finite value"));
        }
        if self.index_bracket.0 < 1.0 {
            return Err(HarnessError::config("index_bracket", "lower end must be at least 1"));
        }
        self.fit_bounds.validate().map_err(field("fit bounds"))?;
        if self.fit_options.max_iterations == 0 {
            return Err(HarnessError::config("fit_max_iterations", "must be positive"));
        }
        Ok(())
    }

    pub fn gold(&self) -> plasmosense_core::Result<ComplexPermittivity> {
        ComplexPermittivity::new(self.gold_eps_real, self.gold_eps_imag)
    }

    /// Stack with the configured gold film and the given analyte.
    pub fn truth_stack(&self, analyte_index: f64) -> plasmosense_core::Result<StackModel> {
        StackModel::new(
            self.prism_index,
            self.gold()?,
            self.gold_thickness_nm,
            analyte_index,
            self.wavelength_nm,
        )
    }

    /// Channel with `t_prism` left at one; callers substitute the prism value.
    pub fn channel(&self) -> plasmosense_core::Result<ChannelModel> {
        ChannelModel::new(self.t_before, 1.0, self.t_after, self.detector_efficiency)
    }

    pub fn plan(&self) -> plasmosense_core::Result<SamplingPlan> {
        SamplingPlan::new(self.trials, self.repetitions, self.seed)
    }

    pub fn fixed_optics(&self) -> FixedOptics {
        FixedOptics {
            prism_index: self.prism_index,
            wavelength: self.wavelength_nm,
        }
    }

    /// Unstated physical parameters that fell back to built-in values.
    pub fn assumptions(&self) -> Vec<String> {
        let mut out: Vec<String> = UNSTATED
            .iter()
            .filter(|k| self.defaulted.contains(*k))
            .map(|k| format!("{k} defaulted (not reported in the source experiment)"))
            .collect();
        if self.probe == ProbeModel::heralded(1.0).expect("unit efficiency is valid") {
            out.push("ideal heralding assumed".into());
        }
        out
    }

    /// Every resolved key with its value, in key order.
    pub fn resolved(&self) -> BTreeMap<&'static str, String> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let pair = |p: (f64, f64)| format!("{},{}", p.0, p.1);
        let mut m = BTreeMap::new();
        m.insert("experiment", self.experiment.map(|e| e.to_string()).unwrap_or_default());
        m.insert("prism_index", self.prism_index.to_string());
        m.insert("wavelength_nm", self.wavelength_nm.to_string());
        m.insert("gold_eps_real", self.gold_eps_real.to_string());
        m.insert("gold_eps_imag", self.gold_eps_imag.to_string());
        m.insert("gold_thickness_nm", self.gold_thickness_nm.to_string());
        match self.probe {
            ProbeModel::HeraldedSinglePhoton { heralding_efficiency } => {
                m.insert("probe", "heralded".into());
                m.insert("heralding_efficiency", heralding_efficiency.to_string());
            }
            ProbeModel::Coherent { mean_photon_number } => {
                m.insert("probe", "coherent".into());
                m.insert("mean_photon_number", mean_photon_number.to_string());
            }
        }
        m.insert("t_before", self.t_before.to_string());
        m.insert("t_after", self.t_after.to_string());
        m.insert("detector_efficiency", self.detector_efficiency.to_string());
        m.insert("bypass_prism", self.bypass_prism.to_string());
        m.insert("trials", self.trials.to_string());
        m.insert("repetitions", self.repetitions.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("zero_noise", self.zero_noise.to_string());
        m.insert("angle_min_deg", self.angle_min_deg.to_string());
        m.insert("angle_max_deg", self.angle_max_deg.to_string());
        m.insert("angle_steps", self.angle_steps.to_string());
        m.insert(
            "analyte_labels",
            self.analytes.iter().map(|a| a.0.as_str()).collect::<Vec<_>>().join(","),
        );
        m.insert(
            "analyte_indices",
            list(&self.analytes.iter().map(|a| a.1).collect::<Vec<_>>()),
        );
        m.insert("fixed_angle_deg", self.fixed_angle_deg.to_string());
        m.insert("concentrations", list(&self.concentrations));
        m.insert("base_index", self.base_index.to_string());
        m.insert("index_slope", self.index_slope.to_string());
        m.insert("index_bracket", pair(self.index_bracket));
        m.insert("normalization", normalization_name(self.normalization).into());
        m.insert("fit_eps_real_bounds", pair(self.fit_bounds.eps_real));
        m.insert("fit_eps_imag_bounds", pair(self.fit_bounds.eps_imag));
        m.insert("fit_thickness_bounds", pair(self.fit_bounds.thickness));
        m.insert("fit_index_bounds", pair(self.fit_bounds.index));
        m.insert("fit_eps_real_start", self.fit_start.eps_real.to_string());
        m.insert("fit_eps_imag_start", self.fit_start.eps_imag.to_string());
        m.insert("fit_thickness_start", self.fit_start.thickness.to_string());
        m.insert("fit_index_start", self.fit_start.index.to_string());
        m.insert("fit_max_iterations", self.fit_options.max_iterations.to_string());
        m.insert("fit_relative_tolerance", self.fit_options.relative_tolerance.to_string());
        m.insert("fit_residual_threshold", self.fit_options.residual_threshold.to_string());
        m
    }

    /// SHA-256 of the resolved configuration. Paths are excluded so that
    /// moving a run does not change its identity.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.resolved() {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl FromStr for ScenarioConfig {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(bad(content, line, "expected `key = value`"));
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(bad(key, line, "unknown key"));
            }
            if let Some(prev) = entries.get(key) {
                let Entry { line: first, .. } = prev;
                return Err(bad(key, line, format!("repeated key (first set on line {first})")));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }
        Self::from_source(Source {
            entries,
            defaulted: BTreeSet::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_error(text: &str) -> (String, Option<usize>) {
        match text.parse::<ScenarioConfig>() {
            Err(HarnessError::Config { field, line, .. }) => (field, line),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let c = ScenarioConfig::paper_default(1.5106);
        assert_eq!(c.trials, 10_000);
        assert_eq!(c.repetitions, 1_000);
        assert_eq!(c.angle_steps, 26);
        assert_eq!(c.concentrations.len(), 9);
        assert_eq!(c.analytes[1], ("bsa_2pct".to_string(), 1.3325));
        assert_eq!(c.normalization, Normalization::AirReference);
        assert!(c.assumptions().iter().any(|a| a.starts_with("t_before")));
        assert!(!c.assumptions().iter().any(|a| a.starts_with("prism_index")));
    }

    #[test]
    fn comments_and_whitespace() {
        let c: ScenarioConfig = "# header\n\nprism_index = 1.52   # glass\n  seed=42\n".parse().unwrap();
        assert_eq!(c.prism_index, 1.52);
        assert_eq!(c.seed, 42);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        assert_eq!(
            config_error("prism_index = 1.51\nprism_indx = 1.5\n"),
            ("prism_indx".to_string(), Some(2))
        );
    }

    #[test]
    fn missing_prism_index() {
        assert_eq!(config_error("seed = 3\n").0, "prism_index");
    }

    #[test]
    fn repeated_key() {
        assert_eq!(config_error("prism_index = 1.5\nprism_index = 1.6\n").1, Some(2));
    }

    #[test]
    fn bad_values_name_their_field() {
        assert_eq!(config_error("prism_index = 1.51\ntrials = many\n").0, "trials");
        assert_eq!(config_error("prism_index = 1.51\nprobe = thermal\n").0, "probe");
        assert_eq!(config_error("prism_index = 1.51\nrepetitions = 0\n").0, "repetitions");
        assert_eq!(config_error("prism_index = 1.51\nt_before = 1.5\n").0, "channel");
        assert_eq!(config_error("prism_index = 0.9\n").0, "stack");
        assert_eq!(config_error("prism_index = 1.51\nindex_bracket = 1.34, 1.33\n").0, "index_bracket");
        assert_eq!(config_error("prism_index = 1.51\nanalyte_labels = a\n").0, "analyte_labels");
        assert_eq!(config_error("prism_index = 1.51\nexperiment = sweep\n").0, "experiment");
    }

    #[test]
    fn hash_tracks_content_not_formatting() {
        let a: ScenarioConfig = "prism_index = 1.5106\nseed = 7".parse().unwrap();
        let b: ScenarioConfig = "seed=7\n# same thing\nprism_index=1.5106\n".parse().unwrap();
        let c: ScenarioConfig = "prism_index = 1.5106\nseed = 8".parse().unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn coherent_probe() {
        let c: ScenarioConfig = "prism_index = 1.51\nprobe = coherent\nmean_photon_number = 2.5".parse().unwrap();
        assert_eq!(c.probe.mean_photon_number(), 2.5);
        assert_eq!(c.resolved()["probe"], "coherent");
    }

    #[test]
    fn custom_analytes_get_generated_labels() {
        let c: ScenarioConfig = "prism_index = 1.51\nanalyte_indices = 1.33".parse().unwrap();
        assert_eq!(c.analytes, vec![("analyte_0".to_string(), 1.33)]);
        let c: ScenarioConfig = "prism_index = 1.51\nanalyte_indices =\nangle_steps = 0".parse().unwrap();
        assert!(c.analytes.is_empty());
    }
}
