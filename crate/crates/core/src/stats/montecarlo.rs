//! Monte Carlo replication of the fasting vs. postprandial DF comparison.
//!
//! Each replication draws `n` fasting and `n` postprandial dominant
//! frequencies (cpm) and runs a paired t-test on them. Replication `r` reads
//! only from stream `r` of the master seed, so the report does not depend on
//! how replications are scheduled across threads.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hz_to_cpm;
use crate::model::{KernelPriors, State};
use crate::rng::{derive_seed, indexed_rng};
use crate::synthesis::{generate_egg, GenerationConfig};

use super::ttest::{paired_t_test, Alternative};

/// Significance thresholds reported, largest first.
pub const THRESHOLDS: [f64; 3] = [0.05, 0.01, 0.001];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McMode {
    /// DFs drawn straight from the dominant-frequency priors.
    Fast,
    /// DFs measured on fully synthesized signals (Welch + argmax).
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_per_group: usize,
    pub replications: usize,
    pub mode: McMode,
    pub seed: u64,
    pub alternative: Alternative,
    /// Signal settings for full mode; `state` and `seed` are overridden per subject.
    pub signal: GenerationConfig,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            n_per_group: 20,
            replications: 1_000_000,
            mode: McMode::Fast,
            seed: 0,
            alternative: Alternative::TwoSided,
            signal: GenerationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub n_per_group: usize,
    pub replications: usize,
    pub mode: McMode,
    pub seed: u64,
    pub valid_replications: usize,
    /// Replications whose differences had zero spread; excluded from the fractions.
    pub degenerate_replications: usize,
    /// Fraction of valid replications with `p < threshold`, keyed by threshold.
    /// Empty when no replication was valid.
    pub frac_p_lt: BTreeMap<String, f64>,
    pub runtime_s: f64,
}

impl MonteCarloReport {
    /// Fraction for one of [`THRESHOLDS`].
    pub fn fraction(&self, threshold: f64) -> Option<f64> {
        self.frac_p_lt.get(&threshold_key(threshold)).copied()
    }

    /// True when no replication produced a usable test.
    pub fn is_undefined(&self) -> bool {
        self.valid_replications == 0
    }
}

/// Wall clock where the platform has one; browsers without WASI report 0.
struct Stopwatch {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    started: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            started: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.started.elapsed().as_secs_f64();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        return 0.0;
    }
}

fn threshold_key(t: f64) -> String {
    format!("{t}")
}

#[derive(Default, Clone, Copy)]
struct Tally {
    valid: usize,
    degenerate: usize,
    below: [usize; THRESHOLDS.len()],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.valid += other.valid;
        self.degenerate += other.degenerate;
        for (a, b) in self.below.iter_mut().zip(other.below) {
            *a += b;
        }
        self
    }
}

pub fn run_monte_carlo(config: &MonteCarloConfig, priors: &KernelPriors) -> Result<MonteCarloReport> {
    if config.replications == 0 {
        return Err(invalid("at least one replication is required"));
    }
    if config.n_per_group < 2 {
        return Err(invalid("at least two DFs per group are required"));
    }
    priors.validate()?;
    if config.mode == McMode::Full {
        config.signal.validate()?;
    }

    let started = Stopwatch::start();
    let tally = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(config, priors, r as u64))
        .try_fold(Tally::default, |acc, t| t.map(|t| acc.merge(t)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let runtime_s = started.seconds();

    let frac_p_lt = if tally.valid == 0 {
        BTreeMap::new()
    } else {
        THRESHOLDS
            .iter()
            .zip(tally.below)
            .map(|(&t, c)| (threshold_key(t), c as f64 / tally.valid as f64))
            .collect()
    };
    Ok(MonteCarloReport {
        n_per_group: config.n_per_group,
        replications: config.replications,
        mode: config.mode,
        seed: config.seed,
        valid_replications: tally.valid,
        degenerate_replications: tally.degenerate,
        frac_p_lt,
        runtime_s,
    })
}

fn replicate(config: &MonteCarloConfig, priors: &KernelPriors, r: u64) -> Result<Tally> {
    let (fasting, post) = match config.mode {
        McMode::Fast => fast_dfs(config, priors, r)?,
        McMode::Full => full_dfs(config, priors, r)?,
    };
    let mut tally = Tally::default();
    match paired_t_test(&fasting, &post, config.alternative) {
        Ok(res) => {
            tally.valid = 1;
            for (c, t) in tally.below.iter_mut().zip(THRESHOLDS) {
                *c = (res.p_value < t) as usize;
            }
        }
        Err(Error::DegenerateTest(_)) => tally.degenerate = 1,
        Err(e) => return Err(e),
    }
    Ok(tally)
}

fn normal(p: crate::model::Prior) -> Result<Normal<f64>> {
    Normal::new(p.mean, p.sd).map_err(|e| invalid(e.to_string()))
}

fn fast_dfs(config: &MonteCarloConfig, priors: &KernelPriors, r: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = indexed_rng(config.seed, r);
    let n = config.n_per_group;
    let f = normal(priors.mu_df(State::Fasting))?;
    let p = normal(priors.mu_df(State::Postprandial))?;
    let fasting = (0..n).map(|_| f.sample(&mut rng)).collect();
    let post = (0..n).map(|_| p.sample(&mut rng)).collect();
    Ok((fasting, post))
}

fn full_dfs(config: &MonteCarloConfig, priors: &KernelPriors, r: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let df = |i: usize, state: State, tag: u64| -> Result<f64> {
        let signal = GenerationConfig {
            state,
            seed: Some(derive_seed(config.seed, &[r, i as u64, tag])),
            arrhythmia: None,
            ..config.signal.clone()
        };
        let features = generate_egg(&signal, priors)?.features.ok_or_else(|| {
            Error::UndefinedFeatures("signal too short to resolve the normogastria band".into())
        })?;
        Ok(hz_to_cpm(features.df_hz))
    };
    let n = config.n_per_group;
    let fasting = (0..n).map(|i| df(i, State::Fasting, 0)).collect::<Result<_>>()?;
    let post = (0..n).map(|i| df(i, State::Postprandial, 1)).collect::<Result<_>>()?;
    Ok((fasting, post))
}
