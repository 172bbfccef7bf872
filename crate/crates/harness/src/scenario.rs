use std::path::Path;

use plasmosense_core::estimation::{
    fit_calibration, fit_concentration, normalize_to_air, propagate_error, sample_mean_sd, IndexInverter,
    MeasuredCurve, SampleSeries,
};
use plasmosense_core::optics::{reflectance_spr, DEFAULT_INDEX_STEP};
use plasmosense_core::photon::{
    draw_counts, enhancement_ratio, expected_sd_classical, expected_sd_quantum, total_transmittance, ProbeModel,
};
use plasmosense_core::rng::derive_seed;
use rayon::prelude::*;

use crate::config::{Experiment, ScenarioConfig};
use crate::error::{HarnessError, Result};
use crate::input::{read_calibration_curves, read_samples};
use crate::report::{
    ConcentrationRow, Provenance, ResidualRow, RunReport, SampleSet, Table, TransmissionRow,
};

const ROLE_AIR: u64 = 0;
const ROLE_SAMPLE: u64 = 1;
const AIR_LABEL: &str = "air";

fn check_experiment(config: &ScenarioConfig, expected: Experiment) -> Result<()> {
    match config.experiment {
        Some(e) if e != expected => Err(HarnessError::config(
            "experiment",
            format!("config is for `{e}` but `{expected}` was requested"),
        )),
        _ => Ok(()),
    }
}

fn check_repetitions(config: &ScenarioConfig) -> Result<()> {
    if config.repetitions < 2 && !config.zero_noise {
        return Err(HarnessError::config(
            "repetitions",
            format!("{} repetition(s); a standard deviation needs at least 2", config.repetitions),
        ));
    }
    Ok(())
}

fn report(config: &ScenarioConfig, experiment: Experiment, table: Table) -> RunReport {
    RunReport {
        experiment,
        table,
        calibration: None,
        concentration_fit: None,
        normalization: config.normalization,
        assumptions: config.assumptions(),
        provenance: Provenance::from_config(config),
        samples: Vec::new(),
    }
}

/// Per-repetition `T_total` through the configured channel with the given
/// prism transmittance, or the analytic expectation in zero-noise mode.
fn measure(config: &ScenarioConfig, t_prism: f64, path: &[u64]) -> Result<Vec<f64>> {
    let channel = config.channel()?.with_prism(t_prism)?;
    if config.zero_noise {
        let herald = match config.probe {
            ProbeModel::HeraldedSinglePhoton { heralding_efficiency } => heralding_efficiency,
            ProbeModel::Coherent { .. } => 1.0,
        };
        let t = herald * total_transmittance(&channel);
        return Ok(vec![t; config.repetitions.max(2)]);
    }
    let plan = config.plan()?.with_seed(derive_seed(config.seed, path));
    Ok(draw_counts(&config.probe, &channel, &plan)?.transmittances()?)
}

struct Benchmarks {
    classical: Option<f64>,
    quantum: Option<f64>,
    enhancement: Option<f64>,
}

/// Shot-noise and Fock-state SDs evaluated at the measured mean.
fn benchmarks(config: &ScenarioConfig, mean_t_total: f64) -> Benchmarks {
    let n = config.probe.mean_photon_number();
    let fock = (n >= 1.0 && n.fract() == 0.0).then_some(n as u64);
    Benchmarks {
        classical: expected_sd_classical(mean_t_total, n, config.trials).ok(),
        quantum: fock.and_then(|n| expected_sd_quantum(mean_t_total, n, config.trials).ok()),
        enhancement: enhancement_ratio(mean_t_total).ok(),
    }
}

fn below_snl(sd: f64, classical: Option<f64>) -> bool {
    classical.is_some_and(|c| sd < c)
}

fn prism_transmittance(config: &ScenarioConfig, analyte_index: f64, theta: f64) -> Result<f64> {
    if config.bypass_prism {
        return Ok(1.0);
    }
    Ok(reflectance_spr(&config.truth_stack(analyte_index)?, theta)?)
}

fn angle_grid(config: &ScenarioConfig) -> Vec<f64> {
    let n = config.angle_steps;
    let (lo, hi) = (config.angle_min_deg, config.angle_max_deg);
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn transmission_row(
    config: &ScenarioConfig,
    label: &str,
    setting: f64,
    total: &SampleSeries,
    air_mean: Option<f64>,
) -> Result<TransmissionRow> {
    let (mean_t_total, sd_t_total) = sample_mean_sd(total)?;
    let prism = match air_mean {
        Some(a) if a > 0.0 => Some(sample_mean_sd(&normalize_to_air(total, a)?)?),
        _ => None,
    };
    let b = benchmarks(config, mean_t_total);
    Ok(TransmissionRow {
        label: label.to_string(),
        n_analyte: None,
        setting,
        r_sp: None,
        model_t_prism: None,
        mean_t_total,
        mean_t_air: air_mean,
        mean_t_prism: prism.map(|p| p.0),
        sd_t_total,
        sd_t_prism: prism.map(|p| p.1),
        sd_classical: b.classical,
        sd_quantum: b.quantum,
        enhancement: b.enhancement,
        below_snl: below_snl(sd_t_total, b.classical),
        repetitions: total.len(),
    })
}

/// Every analyte at every angle, each normalized by an air run at the same
/// angle through the same channel.
pub fn run_angle_scan(config: &ScenarioConfig) -> Result<RunReport> {
    check_experiment(config, Experiment::AngleScan)?;
    check_repetitions(config)?;
    let angles = angle_grid(config);

    let air: Vec<Vec<f64>> = angles
        .par_iter()
        .enumerate()
        .map(|(j, &theta)| measure(config, prism_transmittance(config, 1.0, theta)?, &[ROLE_AIR, j as u64]))
        .collect::<Result<_>>()?;
    let air_means: Vec<f64> = air
        .iter()
        .map(|v| sample_mean_sd(&SampleSeries::new(AIR_LABEL, v.clone())).map(|s| s.0))
        .collect::<plasmosense_core::Result<_>>()?;

    let tasks: Vec<(usize, usize)> = (0..config.analytes.len())
        .flat_map(|a| (0..angles.len()).map(move |j| (a, j)))
        .collect();
    let results: Vec<(TransmissionRow, SampleSet)> = tasks
        .par_iter()
        .map(|&(a, j)| {
            let (label, n) = &config.analytes[a];
            let theta = angles[j];
            let values = measure(
                config,
                prism_transmittance(config, *n, theta)?,
                &[ROLE_SAMPLE, a as u64, j as u64],
            )?;
            let series = SampleSeries::new(label.as_str(), values);
            let mut row = transmission_row(config, label, theta, &series, Some(air_means[j]))?;
            let stack = config.truth_stack(*n)?;
            row.n_analyte = Some(*n);
            row.r_sp = Some(reflectance_spr(&stack, theta)?);
            row.model_t_prism = Some(if config.bypass_prism {
                1.0
            } else {
                config.normalization.transmittance(&stack, theta)?
            });
            let samples = SampleSet {
                label: label.clone(),
                setting: theta,
                values: series.values,
            };
            Ok((row, samples))
        })
        .collect::<Result<_>>()?;

    let mut samples: Vec<SampleSet> = angles
        .iter()
        .zip(air)
        .map(|(&theta, values)| SampleSet {
            label: AIR_LABEL.into(),
            setting: theta,
            values,
        })
        .collect();
    let rows = results
        .into_iter()
        .map(|(row, set)| {
            samples.push(set);
            row
        })
        .collect();
    let mut out = report(
        config,
        Experiment::AngleScan,
        Table::Transmission {
            setting_name: "angle_deg",
            rows,
        },
    );
    out.samples = samples;
    Ok(out)
}

/// Fixed-angle scan over concentrations with a linear index truth
/// `n(C) = base_index + index_slope · C`.
///
/// Every repetition is inverted to an index through the configured stack;
/// the spread of those estimates is compared with the linear propagation of
/// the shot-noise and Fock-state SDs, and a line is fitted to `(C, ⟨n⟩)`.
pub fn run_concentration_scan(config: &ScenarioConfig) -> Result<RunReport> {
    check_experiment(config, Experiment::ConcentrationScan)?;
    check_repetitions(config)?;
    if config.bypass_prism {
        return Err(HarnessError::config(
            "bypass_prism",
            "a concentration scan needs the prism in the beam",
        ));
    }
    let theta = config.fixed_angle_deg;
    let inverter = IndexInverter::with_normalization(
        &config.truth_stack(config.index_bracket.0)?,
        theta,
        config.index_bracket,
        config.normalization,
    )?;
    let air = measure(config, prism_transmittance(config, 1.0, theta)?, &[ROLE_AIR, 0])?;
    let (air_mean, _) = sample_mean_sd(&SampleSeries::new(AIR_LABEL, air.clone()))?;

    let results: Vec<(ConcentrationRow, SampleSeries, SampleSet)> = config
        .concentrations
        .par_iter()
        .enumerate()
        .map(|(i, &c)| {
            let n_true = config.base_index + config.index_slope * c;
            let values = measure(config, prism_transmittance(config, n_true, theta)?, &[ROLE_SAMPLE, i as u64])?;
            let label = format!("c={c}");
            let total = SampleSeries::new(label.as_str(), values);
            let (mean_t_total, sd_t_total) = sample_mean_sd(&total)?;
            let prism = normalize_to_air(&total, air_mean)?;
            let (mean_t_prism, sd_t_prism) = sample_mean_sd(&prism)?;
            let indices = prism
                .values
                .iter()
                .map(|&t| inverter.invert(t))
                .collect::<plasmosense_core::Result<Vec<f64>>>()?;
            let index_series = SampleSeries::new(label.as_str(), indices);
            let (mean_n, dn_measured) = sample_mean_sd(&index_series)?;
            let sensitivity = config
                .normalization
                .sensitivity(&config.truth_stack(mean_n)?, theta, DEFAULT_INDEX_STEP)?;
            let b = benchmarks(config, mean_t_total);
            let lepm = |sd: Option<f64>| sd.and_then(|s| propagate_error(s / air_mean, sensitivity.abs()).ok());
            let dn_classical_lepm = lepm(b.classical);
            let row = ConcentrationRow {
                concentration: c,
                n_true,
                mean_t_total,
                mean_t_air: air_mean,
                mean_t_prism,
                sd_t_total,
                sd_t_prism,
                mean_n,
                dn_measured,
                sensitivity,
                sd_classical: b.classical,
                sd_quantum: b.quantum,
                enhancement: b.enhancement,
                dn_classical_lepm,
                dn_quantum_lepm: lepm(b.quantum),
                dn_ratio: dn_classical_lepm.filter(|_| dn_measured > 0.0).map(|d| d / dn_measured),
                below_snl: below_snl(sd_t_total, b.classical),
            };
            let set = SampleSet {
                label,
                setting: c,
                values: total.values,
            };
            Ok((row, index_series, set))
        })
        .collect::<Result<_>>()?;

    let points: Vec<(f64, SampleSeries)> = config
        .concentrations
        .iter()
        .zip(&results)
        .map(|(&c, r)| (c, r.1.clone()))
        .collect();
    let fit = if points.len() >= 2 {
        Some(fit_concentration(&points)?)
    } else {
        None
    };
    let mut samples = vec![SampleSet {
        label: AIR_LABEL.into(),
        setting: theta,
        values: air,
    }];
    let rows = results
        .into_iter()
        .map(|(row, _, set)| {
            samples.push(set);
            row
        })
        .collect();
    let mut out = report(config, Experiment::ConcentrationScan, Table::Concentration(rows));
    out.concentration_fit = fit;
    out.samples = samples;
    Ok(out)
}

/// Fits gold permittivity, thickness and one index per curve to the
/// measured `⟨T_prism⟩` curves in `input_csv`.
///
/// A fit that does not converge still yields a report; check
/// [`RunReport::status`].
pub fn run_calibrate(config: &ScenarioConfig, input_csv: &Path) -> Result<RunReport> {
    check_experiment(config, Experiment::Calibrate)?;
    let curves = read_calibration_curves(input_csv)?;
    calibrate_curves(config, &curves)
}

pub fn calibrate_curves(config: &ScenarioConfig, curves: &[MeasuredCurve]) -> Result<RunReport> {
    let result = fit_calibration(
        curves,
        config.fixed_optics(),
        &config.fit_bounds,
        &config.fit_start,
        &config.fit_options,
    )?;
    let mut rows = Vec::new();
    for curve in curves {
        let stack = result.stack(result.analyte_indices[&curve.label])?;
        for (i, (&theta, &measured)) in curve.angles.iter().zip(&curve.values).enumerate() {
            let fitted = result.normalization.transmittance(&stack, theta)?;
            rows.push(ResidualRow {
                label: curve.label.clone(),
                angle_deg: theta,
                measured,
                sd: curve.sd.as_ref().map(|s| s[i]),
                fitted,
                residual: measured - fitted,
            });
        }
    }
    let mut out = report(config, Experiment::Calibrate, Table::Residuals(rows));
    out.calibration = Some(result);
    Ok(out)
}

/// Statistics of recorded per-repetition `T_total` samples. Rows labelled
/// `air` serve as the reference for every other label at the same setting.
pub fn run_analyze(config: &ScenarioConfig, input_csv: &Path) -> Result<RunReport> {
    check_experiment(config, Experiment::Analyze)?;
    let sets = read_samples(input_csv)?;
    analyze_samples(config, &sets)
}

pub fn analyze_samples(config: &ScenarioConfig, sets: &[SampleSet]) -> Result<RunReport> {
    let air_means = sets
        .iter()
        .filter(|s| s.label == AIR_LABEL)
        .map(|s| Ok((s.setting, sample_mean_sd(&SampleSeries::new(AIR_LABEL, s.values.clone()))?.0)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let rows = sets
        .iter()
        .filter(|s| s.label != AIR_LABEL)
        .map(|s| {
            let air = air_means.iter().find(|a| a.0 == s.setting).map(|a| a.1);
            let series = SampleSeries::new(s.label.as_str(), s.values.clone());
            transmission_row(config, &s.label, s.setting, &series, air)
        })
        .collect::<Result<_>>()?;
    Ok(report(
        config,
        Experiment::Analyze,
        Table::Transmission {
            setting_name: "setting",
            rows,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &str) -> ScenarioConfig {
        let mut c: ScenarioConfig = format!("prism_index = 1.5106\n{extra}").parse().unwrap();
        c.trials = 2000;
        if !extra.contains("repetitions") {
            c.repetitions = 50;
        }
        if !extra.contains("angle_steps") {
            c.angle_steps = 4;
        }
        c
    }

    #[test]
    fn grid_hits_endpoints() {
        let g = angle_grid(&small(""));
        assert_eq!(g, vec![66.5, 66.5 + 2.5 / 3.0, 66.5 + 5.0 / 3.0, 69.0]);
        assert!(angle_grid(&small("angle_steps = 0")).is_empty());
    }

    #[test]
    fn row_count_matches_grid() {
        let r = run_angle_scan(&small("")).unwrap();
        assert_eq!(r.table.len(), 8);
        assert_eq!(r.samples.len(), 12);
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let r = run_angle_scan(&small("angle_steps = 0")).unwrap();
        assert!(r.table.is_empty());
    }

    #[test]
    fn single_repetition_rejected() {
        match run_angle_scan(&small("repetitions = 1")) {
            Err(HarnessError::Config { field, .. }) => assert_eq!(field, "repetitions"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_experiment_rejected() {
        let c = small("experiment = concentration_scan");
        assert!(matches!(run_angle_scan(&c), Err(HarnessError::Config { .. })));
    }

    #[test]
    fn verdict_follows_sd_comparison() {
        let r = run_angle_scan(&small("probe = coherent\nmean_photon_number = 1")).unwrap();
        let Table::Transmission { rows, .. } = &r.table else { panic!() };
        for row in rows {
            assert_eq!(row.below_snl, row.sd_t_total < row.sd_classical.unwrap());
        }
    }

    #[test]
    fn zero_noise_is_analytic() {
        let r = run_angle_scan(&small("zero_noise = true\nrepetitions = 1")).unwrap();
        let Table::Transmission { rows, .. } = &r.table else { panic!() };
        for row in rows {
            assert_eq!(row.sd_t_total, 0.0);
            assert!((row.mean_t_prism.unwrap() - row.model_t_prism.unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn fractional_coherent_amplitude_has_no_fock_benchmark() {
        let c = small("probe = coherent\nmean_photon_number = 0.5");
        assert!(benchmarks(&c, 0.2).quantum.is_none());
        assert!(benchmarks(&c, 0.2).classical.is_some());
    }
}
