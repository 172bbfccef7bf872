//! Seeded synthetic angle scans measured through the air-normalized pipeline.

use plasmosense_core::estimation::{normalize_to_air, sample_mean_sd, MeasuredCurve, SampleSeries};
use plasmosense_core::optics::{reflectance_spr, ComplexPermittivity, StackModel};
use plasmosense_core::photon::{draw_counts, ChannelModel, ProbeModel, SamplingPlan};
use plasmosense_core::rng::derive_seed;

pub const PAPER_EPS: (f64, f64) = (-18.2484, 0.8096);
pub const PAPER_D: f64 = 57.41;
pub const WATER: f64 = 1.3284;
pub const BSA_2PCT: f64 = 1.3325;

pub fn paper_stack(n: f64) -> StackModel {
    let gold = ComplexPermittivity::new(PAPER_EPS.0, PAPER_EPS.1).unwrap();
    StackModel::new(1.5106, gold, PAPER_D, n, 799.0).unwrap()
}

pub fn angles(steps: usize) -> Vec<f64> {
    (0..steps).map(|i| 66.5 + 2.5 * i as f64 / (steps - 1) as f64).collect()
}

pub fn noiseless_curve(label: &str, n: f64, steps: usize) -> MeasuredCurve {
    let s = paper_stack(n);
    let a = angles(steps);
    let v = a.iter().map(|&t| reflectance_spr(&s, t).unwrap()).collect();
    MeasuredCurve::new(label, a, v, None).unwrap()
}

/// Heralded photons through t_before 0.8, t_after 0.9, η_d 0.5.
pub fn noisy_curve(label: &str, n: f64, steps: usize, trials: u64, reps: usize, seed: u64) -> MeasuredCurve {
    let probe = ProbeModel::heralded(1.0).unwrap();
    let base = ChannelModel::new(0.8, 1.0, 0.9, 0.5).unwrap();
    let air = paper_stack(1.0);
    let sample = paper_stack(n);
    let mut means = Vec::new();
    let mut sds = Vec::new();
    let a = angles(steps);
    for (i, &theta) in a.iter().enumerate() {
        let series = |stack: &StackModel, role: u64| {
            let channel = base.with_prism(reflectance_spr(stack, theta).unwrap()).unwrap();
            let plan = SamplingPlan::new(trials, reps, derive_seed(seed, &[n.to_bits(), i as u64, role])).unwrap();
            let record = draw_counts(&probe, &channel, &plan).unwrap();
            SampleSeries::new(label, record.transmittances().unwrap())
        };
        let (air_mean, _) = sample_mean_sd(&series(&air, 0)).unwrap();
        let prism = normalize_to_air(&series(&sample, 1), air_mean).unwrap();
        let (m, sd) = sample_mean_sd(&prism).unwrap();
        means.push(m);
        sds.push(sd);
    }
    MeasuredCurve::new(label, a, means, Some(sds)).unwrap()
}
