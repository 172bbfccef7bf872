//! Probe states, loss channel and photon-counting statistics.
//!
//! A heralded single photon passing a channel of total transmittance `T`
//! is detected with probability `T`, so `ν` trials give a binomial count
//! with variance `νT(1−T)`. A coherent probe with mean photon number `N`
//! gives a Poisson count with variance `νNT`. The transmittance estimator
//! is the sample mean `N_t / (νN)`.

use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Counting statistics of the detected photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    /// Coherent light, shot-noise limited.
    Poisson,
    /// Fock-state input, sub-shot-noise.
    Binomial,
}

/// Light source feeding the sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeModel {
    /// Heralded single photon; the heralded mode holds a photon with
    /// probability `heralding_efficiency` and is empty otherwise.
    HeraldedSinglePhoton { heralding_efficiency: f64 },
    /// Coherent state `|α⟩` with `|α|² = mean_photon_number`.
    Coherent { mean_photon_number: f64 },
}

impl ProbeModel {
    pub fn heralded(heralding_efficiency: f64) -> Result<Self> {
        check_unit("heralding_efficiency", heralding_efficiency)?;
        Ok(ProbeModel::HeraldedSinglePhoton {
            heralding_efficiency,
        })
    }

    pub fn coherent(mean_photon_number: f64) -> Result<Self> {
        if !(mean_photon_number.is_finite() && mean_photon_number >= 0.0) {
            return Err(Error::invalid(
                "mean_photon_number",
                format!("{mean_photon_number} must be non-negative"),
            ));
        }
        Ok(ProbeModel::Coherent { mean_photon_number })
    }

    pub fn mean_photon_number(&self) -> f64 {
        match *self {
            ProbeModel::HeraldedSinglePhoton { .. } => 1.0,
            ProbeModel::Coherent { mean_photon_number } => mean_photon_number,
        }
    }

    pub fn statistics(&self) -> Statistics {
        match self {
            ProbeModel::HeraldedSinglePhoton { .. } => Statistics::Binomial,
            ProbeModel::Coherent { .. } => Statistics::Poisson,
        }
    }
}

/// Multiplicative loss chain between source and counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub t_before: f64,
    pub t_prism: f64,
    pub t_after: f64,
    pub detector_efficiency: f64,
}

impl ChannelModel {
    pub fn new(t_before: f64, t_prism: f64, t_after: f64, detector_efficiency: f64) -> Result<Self> {
        check_unit("t_before", t_before)?;
        check_unit("t_prism", t_prism)?;
        check_unit("t_after", t_after)?;
        check_unit("detector_efficiency", detector_efficiency)?;
        Ok(Self {
            t_before,
            t_prism,
            t_after,
            detector_efficiency,
        })
    }

    pub fn lossless() -> Self {
        Self {
            t_before: 1.0,
            t_prism: 1.0,
            t_after: 1.0,
            detector_efficiency: 1.0,
        }
    }

    pub fn with_prism(&self, t_prism: f64) -> Result<Self> {
        Self::new(self.t_before, t_prism, self.t_after, self.detector_efficiency)
    }

    /// Losses outside the prism, i.e. what air normalization divides out.
    pub fn external_transmittance(&self) -> f64 {
        self.t_before * self.t_after * self.detector_efficiency
    }
}

/// `ν` trials per sample, `μ` repeated samples, and the seed they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SamplingPlan {
    trials: u64,
    repetitions: usize,
    seed: u64,
}

impl SamplingPlan {
    pub fn new(trials: u64, repetitions: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if repetitions == 0 {
            return Err(Error::invalid("repetitions", "must be at least 1"));
        }
        Ok(Self {
            trials,
            repetitions,
            seed,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// Detected-photon totals, one per repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub counts: Vec<u64>,
    pub plan: SamplingPlan,
    pub probe: ProbeModel,
    pub channel: ChannelModel,
}

impl CountRecord {
    /// Per-repetition transmittance estimates `N_t / (νN)`.
    pub fn transmittances(&self) -> Result<Vec<f64>> {
        let n = self.probe.mean_photon_number();
        if n <= 0.0 {
            return Err(Error::invalid("mean_photon_number", "zero probe energy"));
        }
        let norm = self.plan.trials() as f64 * n;
        Ok(self.counts.iter().map(|&c| c as f64 / norm).collect())
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(name, format!("{value} outside [0, 1]")));
    }
    Ok(())
}

pub fn total_transmittance(channel: &ChannelModel) -> f64 {
    channel.t_before * channel.t_prism * channel.t_after * channel.detector_efficiency
}

/// Simulates `μ` independent samples of `ν` trials each.
///
/// Repetition `j` draws from stream `j` of `plan.seed`, and results are
/// collected in repetition order, so the record does not depend on how the
/// work is scheduled.
pub fn draw_counts(probe: &ProbeModel, channel: &ChannelModel, plan: &SamplingPlan) -> Result<CountRecord> {
    let t_total = total_transmittance(channel);
    let trials = plan.trials();
    let seed = plan.seed();
    let counts: Vec<u64> = match *probe {
        ProbeModel::HeraldedSinglePhoton {
            heralding_efficiency,
        } => {
            let p = (heralding_efficiency * t_total).clamp(0.0, 1.0);
            let dist = Binomial::new(trials, p).map_err(|e| Error::invalid("binomial", e.to_string()))?;
            (0..plan.repetitions())
                .into_par_iter()
                .map(|j| dist.sample(&mut stream_rng(seed, j as u64)))
                .collect()
        }
        ProbeModel::Coherent { mean_photon_number } => {
            let lambda = trials as f64 * mean_photon_number * t_total;
            if lambda == 0.0 {
                vec![0; plan.repetitions()]
            } else {
                let dist = Poisson::new(lambda).map_err(|e| Error::invalid("poisson", e.to_string()))?;
                (0..plan.repetitions())
                    .into_par_iter()
                    .map(|j| {
                        let draw: f64 = dist.sample(&mut stream_rng(seed, j as u64));
                        draw as u64
                    })
                    .collect()
            }
        }
    };
    Ok(CountRecord {
        counts,
        plan: *plan,
        probe: *probe,
        channel: *channel,
    })
}

fn check_transmittance(t: f64) -> Result<()> {
    check_unit("transmittance", t)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    Ok(())
}

/// Shot-noise SD of the transmittance estimate: `sqrt(T / (νN))`.
pub fn expected_sd_classical(t_true: f64, mean_photon_number: f64, trials: u64) -> Result<f64> {
    check_transmittance(t_true)?;
    check_trials(trials)?;
    if mean_photon_number.is_nan() || mean_photon_number <= 0.0 {
        return Err(Error::invalid("mean_photon_number", "zero probe energy"));
    }
    Ok((t_true / (trials as f64 * mean_photon_number)).sqrt())
}

/// Fock-state SD of the transmittance estimate: `sqrt(T(1−T) / (νN))`.
pub fn expected_sd_quantum(t_true: f64, photon_number: u64, trials: u64) -> Result<f64> {
    check_transmittance(t_true)?;
    check_trials(trials)?;
    if photon_number == 0 {
        return Err(Error::invalid("photon_number", "must be at least 1"));
    }
    Ok((t_true * (1.0 - t_true) / (trials as f64 * photon_number as f64)).sqrt())
}

/// Classical-to-quantum SD ratio `1 / sqrt(1 − T)`.
pub fn enhancement_ratio(t_total_true: f64) -> Result<f64> {
    check_transmittance(t_total_true)?;
    if t_total_true >= 1.0 {
        return Err(Error::invalid("t_total", "enhancement diverges at T = 1"));
    }
    Ok(1.0 / (1.0 - t_total_true).sqrt())
}

/// Per-trial Fisher information `1/σ²` about the transmittance.
pub fn fisher_information(t_true: f64, statistics: Statistics, mean_photon_number: f64) -> Result<f64> {
    check_transmittance(t_true)?;
    if mean_photon_number.is_nan() || mean_photon_number <= 0.0 {
        return Err(Error::invalid("mean_photon_number", "zero probe energy"));
    }
    let variance = match statistics {
        Statistics::Poisson => t_true * mean_photon_number,
        Statistics::Binomial => t_true * (1.0 - t_true) * mean_photon_number,
    };
    if variance <= 0.0 {
        return Err(Error::invalid(
            "transmittance",
            format!("{t_true} gives zero variance; Fisher information unbounded"),
        ));
    }
    Ok(1.0 / variance)
}

/// Cramér–Rao lower bound `(νF)^{-1/2}` on the estimator SD.
pub fn cramer_rao_bound(fisher: f64, trials: u64) -> Result<f64> {
    check_trials(trials)?;
    if !(fisher.is_finite() && fisher > 0.0) {
        return Err(Error::invalid("fisher_information", format!("{fisher} must be positive")));
    }
    Ok((trials as f64 * fisher).powf(-0.5))
}
