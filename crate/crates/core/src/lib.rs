//! Synthetic electrogastrogram (EGG) generation.
//!
//! Signals are produced from a spectral model: a normogastria Gaussian kernel
//! plus an optional breathing-artifact kernel, with kernel parameters drawn
//! from population priors. The spectrum is turned into a time series by an
//! inverse FFT with random phases. Arrhythmia and simulator-sickness episodes
//! are spliced in as separately synthesized segments.
//!
//! The crate also carries the analysis side (band-pass filtering, Welch PSD,
//! dominant/median frequency, band powers, weighted Gaussian fitting) and the
//! statistics used to validate generated dominant frequencies (paired t-test
//! and a Monte Carlo harness).
//!
//! ```
//! use eggsynth::{generate_egg, GenerationConfig, KernelPriors};
//!
//! let config = GenerationConfig { seed: Some(1), ..GenerationConfig::default() };
//! let out = generate_egg(&config, &KernelPriors::default()).unwrap();
//! assert_eq!(out.signal.samples.len(), 2400);
//! let df = out.features.unwrap().df_hz;
//! assert!(df > 2.0 / 60.0 && df < 4.0 / 60.0);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod error;
pub mod model;
pub mod rng;
pub mod stats;
pub mod synthesis;

pub use analysis::{BandConfig, FeatureSet};
pub use error::{Error, Result};
pub use model::{FrequencyGrid, KernelDraw, KernelPriors, Prior, PsdModel, State};
pub use synthesis::{
    generate_egg, generate_egg_vr, EggSignal, GenerationConfig, GenerationMetadata,
    GenerationOutput, SegmentLabel, VrOutput,
};

/// Cycles per minute to Hz.
pub fn cpm_to_hz(cpm: f64) -> f64 {
    cpm / 60.0
}

/// Hz to cycles per minute.
pub fn hz_to_cpm(hz: f64) -> f64 {
    hz * 60.0
}
