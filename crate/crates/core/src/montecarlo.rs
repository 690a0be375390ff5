//! Deterministic, parallel Monte Carlo experiment engine.
//!
//! A run samples `n_samples` chips, evaluates every configured challenge
//! under every configured environment, and keeps per-bit analog margins for
//! the summary statistics. Instance `i` draws everything from the
//! counter-derived stream `(master_seed, i)`, so the output is bit-identical
//! for one worker or many, and for any work-stealing schedule.

use crate::apuf::{ApufDesign, Challenge, CrpSet};
use crate::rng::NoiseStream;
use crate::variation::{sample_instance, Environment, VariationSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashSet;

/// Stream index reserved for challenge subsampling; far outside any
/// plausible instance index range.
const CHALLENGE_STREAM_INDEX: u64 = 0xc4a1_1e4e_5eed_0001;

/// Re-exported stream derivation: statistically independent streams for
/// distinct indices, identical streams for identical `(seed, index)`.
pub fn derive_stream(master_seed: u64, index: u64) -> NoiseStream {
    NoiseStream::derive(master_seed, index)
}

/// How the challenge set is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChallengeSource {
    /// All `2^n` challenges; refused for n > 16.
    Exhaustive,
    /// `count` distinct challenges drawn uniformly from the seed.
    Sampled { count: usize },
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_samples: usize,
    pub master_seed: u64,
    pub design: ApufDesign,
    pub variation: VariationSpec,
    pub challenges: ChallengeSource,
    pub environments: Vec<Environment>,
    /// Provenance hash carried into outputs (the CLI stores its experiment
    /// config hash here).
    pub config_hash: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::config("n_samples must be >= 1"));
        }
        self.design.validate()?;
        self.variation.validate()?;
        if self.environments.is_empty() {
            return Err(Error::Empty("environment list"));
        }
        for env in &self.environments {
            env.validate()?;
        }
        match self.challenges {
            ChallengeSource::Exhaustive => {
                if self.design.n_stages > 16 {
                    return Err(Error::config(format!(
                        "exhaustive challenges rejected for n = {} > 16",
                        self.design.n_stages
                    )));
                }
            }
            ChallengeSource::Sampled { count } => {
                if count < 1 {
                    return Err(Error::config("sampled challenge count must be >= 1"));
                }
                let n = self.design.n_stages;
                if n <= 16 && count > (1usize << n) {
                    return Err(Error::config(format!(
                        "cannot draw {count} distinct challenges from a 2^{n} space"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The deterministic challenge list of this configuration.
    pub fn challenge_list(&self) -> Result<Vec<Challenge>> {
        self.validate()?;
        let n = self.design.n_stages;
        match self.challenges {
            ChallengeSource::Exhaustive => Challenge::enumerate_all(n),
            ChallengeSource::Sampled { count } => {
                let mut stream = derive_stream(self.master_seed, CHALLENGE_STREAM_INDEX);
                let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
                let mut seen = HashSet::with_capacity(count);
                let mut out = Vec::with_capacity(count);
                while out.len() < count {
                    let idx = stream.next_u64() & mask;
                    if seen.insert(idx) {
                        out.push(Challenge::from_index(n, idx)?);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Everything one sampled chip produced: one [`CrpSet`] per environment,
/// in the configured environment order.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSamples {
    pub instance_index: usize,
    pub crps: Vec<CrpSet>,
}

/// Output of [`run_mc`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub master_seed: u64,
    pub config_hash: u64,
    pub challenges: Vec<Challenge>,
    pub environments: Vec<Environment>,
    pub per_instance: Vec<InstanceSamples>,
}

impl SampleSet {
    pub fn record_count(&self) -> usize {
        self.per_instance
            .iter()
            .map(|inst| inst.crps.iter().map(|c| c.records.len()).sum::<usize>())
            .sum()
    }

    pub fn response_width(&self) -> usize {
        self.per_instance
            .first()
            .and_then(|i| i.crps.first())
            .map(|c| c.n_response_bits)
            .unwrap_or(0)
    }
}

/// Run the configured Monte Carlo experiment.
///
/// The per-instance work is a parallel map over instance indices on the
/// current rayon pool; results are collected in index order, so worker
/// count cannot affect the output.
pub fn run_mc(config: &McConfig) -> Result<SampleSet> {
    config.validate()?;
    let challenges = config.challenge_list()?;
    let per_instance: Vec<InstanceSamples> = (0..config.n_samples)
        .into_par_iter()
        .map(|i| -> Result<InstanceSamples> {
            let stream = derive_stream(config.master_seed, i as u64);
            let inst = sample_instance(&config.design, &config.variation, &stream)?;
            let crps = config
                .environments
                .iter()
                .map(|env| crate::apuf::evaluate_crp_set(&inst, &challenges, env))
                .collect::<Result<Vec<_>>>()?;
            Ok(InstanceSamples {
                instance_index: i,
                crps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        master_seed: config.master_seed,
        config_hash: config.config_hash,
        challenges,
        environments: config.environments.clone(),
        per_instance,
    })
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `len = counts.len() + 1`; a single-bin degenerate histogram has two
    /// equal edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn build(values: &[f64], bins: usize) -> Histogram {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            return Histogram {
                edges: vec![lo, hi],
                counts: vec![values.len() as u64],
            };
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let mut idx = ((v - lo) / width) as usize;
            if idx >= bins {
                idx = bins - 1;
            }
            counts[idx] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Mean, population standard deviation and histogram of one response bit's
/// analog observable.
#[derive(Debug, Clone, PartialEq)]
pub struct BitStats {
    pub mean: f64,
    /// Population convention (divide by N).
    pub std: f64,
    pub histogram: Histogram,
}

/// Per-bit summary of a [`SampleSet`]. The observable for each sampled chip
/// is its mean margin over all records (challenges × environments), so the
/// histogram has one point per chip.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub per_bit: Vec<BitStats>,
    pub points_per_bit: usize,
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Summarize per-bit analog margins over a sample set.
pub fn summarize(samples: &SampleSet, bins: usize) -> Result<SummaryStats> {
    if samples.per_instance.is_empty() || samples.record_count() == 0 {
        return Err(Error::Empty("sample set"));
    }
    if bins == 0 {
        return Err(Error::config("histogram needs at least one bin"));
    }
    let width = samples.response_width();
    let mut per_bit = Vec::with_capacity(width);
    for bit in 0..width {
        let values: Vec<f64> = samples
            .per_instance
            .iter()
            .map(|inst| {
                let mut sum = 0.0;
                let mut count = 0usize;
                for crp in &inst.crps {
                    for rec in &crp.records {
                        sum += rec.word.margins_s[bit];
                        count += 1;
                    }
                }
                sum / count as f64
            })
            .collect();
        let (mean, std) = mean_and_population_std(&values);
        per_bit.push(BitStats {
            mean,
            std,
            histogram: Histogram::build(&values, bins),
        });
    }
    Ok(SummaryStats {
        per_bit,
        points_per_bit: samples.per_instance.len(),
    })
}
