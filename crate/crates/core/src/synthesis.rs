//! Time-series synthesis from spectral models and segment splicing.

use std::f64::consts::TAU;

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analysis::{extract_features, FeatureConfig, FeatureSet};
use crate::error::{invalid, Result};
use crate::model::{
    add_colored_noise, build_arrhythmia_psd, build_psd, build_sickness_psd, draw_kernels,
    FrequencyGrid, KernelDraw, KernelPriors, PsdModel, State,
};
use crate::rng::{stream_rng, Stream};

/// Turns a one-sided magnitude spectrum into a real series of `n_samples`.
///
/// Bin `m` gets amplitude `sqrt(mags[m])` and a uniform random phase; DC and
/// (for even `n_samples`) Nyquist stay real. The spectrum is completed
/// Hermitian-symmetrically and inverted with the `1/N` convention, so
/// `sum(x^2) == sum(|X|^2) / N` over the full two-sided spectrum.
pub fn psd_to_timeseries<R: Rng + ?Sized>(
    psd: &PsdModel,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let bins = n_samples / 2 + 1;
    if psd.len() != bins {
        return Err(invalid(format!(
            "spectrum has {} bins, {} samples need {bins}",
            psd.len(),
            n_samples
        )));
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n_samples];
    spectrum[0] = Complex64::new(psd.mags[0].sqrt(), 0.0);
    for m in 1..bins {
        let amp = psd.mags[m].sqrt();
        if 2 * m == n_samples {
            spectrum[m] = Complex64::new(amp, 0.0);
        } else {
            let phase = rng.random::<f64>() * TAU;
            let x = Complex64::from_polar(amp, phase);
            spectrum[m] = x;
            spectrum[n_samples - m] = x.conj();
        }
    }
    FftPlanner::new()
        .plan_fft_inverse(n_samples)
        .process(&mut spectrum);
    let scale = 1.0 / n_samples as f64;
    Ok(spectrum.iter().map(|c| c.re * scale).collect())
}

/// Energy `sum(x^2)` implied by a one-sided spectrum under [`psd_to_timeseries`].
pub fn parseval_energy(psd: &PsdModel, n_samples: usize) -> f64 {
    let total: f64 = psd
        .mags
        .iter()
        .enumerate()
        .map(|(m, &p)| if m == 0 || 2 * m == n_samples { p } else { 2.0 * p })
        .sum();
    total / n_samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentLabel {
    Normal,
    Arrhythmia,
    Sickness,
}

/// Half-open time window in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start_s: f64,
    pub end_s: f64,
}

impl Window {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn is_empty(&self) -> bool {
        self.start_s == self.end_s
    }

    /// Sample range `[round(start*fs), round(end*fs))`.
    pub fn sample_range(&self, fs: f64) -> std::ops::Range<usize> {
        let a = (self.start_s * fs).round() as usize;
        let b = (self.end_s * fs).round() as usize;
        a..b
    }

    fn validate(&self, duration: f64, what: &str) -> Result<()> {
        let ok = self.start_s.is_finite()
            && self.end_s.is_finite()
            && 0.0 <= self.start_s
            && self.start_s <= self.end_s
            && self.end_s <= duration;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "{what} window ({}, {}) must satisfy 0 <= start <= end <= duration ({duration})",
                self.start_s, self.end_s
            )))
        }
    }
}

/// Parameters of one generated recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub fs: f64,
    pub state: State,
    pub breathing: bool,
    /// Presentational only; the library never draws anything.
    pub plot: bool,
    /// Absent means a fresh seed from OS entropy.
    pub seed: Option<u64>,
    pub arrhythmia: Option<Window>,
    /// Colored-noise scale as a fraction of the spectral peak.
    pub noise_scale: f64,
    /// Sickness episode, only read by [`generate_egg_vr`].
    pub sickness: Option<Window>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            duration: 1200.0,
            fs: 2.0,
            state: State::Fasting,
            breathing: true,
            plot: false,
            seed: None,
            arrhythmia: None,
            noise_scale: 0.0,
            sickness: None,
        }
    }
}

impl GenerationConfig {
    /// Default sickness episode of the VR variant.
    pub const DEFAULT_SICKNESS: Window = Window {
        start_s: 600.0,
        end_s: 1200.0,
    };

    pub fn n_samples(&self) -> usize {
        (self.duration * self.fs).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid("duration must be positive"));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        if self.duration * self.fs < 16.0 {
            return Err(invalid("duration * fs must give at least 16 samples"));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(invalid("noise scale must be nonnegative"));
        }
        if let Some(w) = self.arrhythmia {
            w.validate(self.duration, "arrhythmia")?;
        }
        if let Some(w) = self.sickness {
            w.validate(self.duration, "sickness")?;
        }
        Ok(())
    }

    fn resolved_seed(&self) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            #[cfg(feature = "entropy")]
            None => Ok(crate::rng::entropy_seed()),
            #[cfg(not(feature = "entropy"))]
            None => Err(invalid("a seed is required without the `entropy` feature")),
        }
    }
}

/// Contiguous run of equally labeled samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub label: SegmentLabel,
    pub start: usize,
    pub end: usize,
}

/// Everything needed to regenerate a signal bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetadata {
    pub tool_version: String,
    /// `generate` or `generate-vr`.
    pub variant: String,
    pub seed: u64,
    /// Config with the seed filled in.
    pub config: GenerationConfig,
    pub priors: KernelPriors,
    pub draw: KernelDraw,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EggSignal {
    /// Amplitudes, arbitrary units.
    pub samples: Vec<f64>,
    pub fs: f64,
    pub labels: Vec<SegmentLabel>,
    pub metadata: GenerationMetadata,
}

impl EggSignal {
    fn new(samples: Vec<f64>, fs: f64, metadata: GenerationMetadata) -> Self {
        let mut labels = vec![SegmentLabel::Normal; samples.len()];
        for seg in &metadata.segments {
            labels[seg.start..seg.end].fill(seg.label);
        }
        Self {
            samples,
            fs,
            labels,
            metadata,
        }
    }

    pub fn time_s(&self, i: usize) -> f64 {
        i as f64 / self.fs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutput {
    pub signal: EggSignal,
    /// Model spectrum of the regular rhythm, noise included.
    pub psd: PsdModel,
    /// `None` when the recording is too short or too flat for the feature bands.
    pub features: Option<FeatureSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VrOutput {
    pub signal: EggSignal,
    pub normal_psd: PsdModel,
    pub sickness_psd: PsdModel,
    /// Features of the samples before onset; `None` when undefined.
    pub before: Option<FeatureSet>,
    /// Features of the samples inside the sickness window.
    pub during: Option<FeatureSet>,
}

struct Synth<'a> {
    config: &'a GenerationConfig,
    seed: u64,
    draw: KernelDraw,
    samples: Vec<f64>,
    segments: Vec<Segment>,
}

impl<'a> Synth<'a> {
    fn start(config: &'a GenerationConfig, priors: &KernelPriors) -> Result<Self> {
        config.validate()?;
        let seed = config.resolved_seed()?;
        let draw = draw_kernels(
            priors,
            config.state,
            config.breathing,
            &mut stream_rng(seed, Stream::Kernels),
        )?;
        Ok(Self {
            config,
            seed,
            draw,
            samples: Vec::new(),
            segments: Vec::new(),
        })
    }

    fn grid(&self, n: usize) -> Result<FrequencyGrid> {
        FrequencyGrid::new(n, self.config.fs)
    }

    fn base(&mut self) -> Result<PsdModel> {
        let n = self.config.n_samples();
        let grid = self.grid(n)?;
        let psd = add_colored_noise(
            build_psd(&self.draw, &grid)?,
            self.config.noise_scale,
            &mut stream_rng(self.seed, Stream::Noise),
        )?;
        self.samples = psd_to_timeseries(&psd, n, &mut stream_rng(self.seed, Stream::Phases))?;
        Ok(psd)
    }

    fn splice(&mut self, range: std::ops::Range<usize>, segment: &[f64], label: SegmentLabel) {
        self.samples[range.clone()].copy_from_slice(segment);
        self.segments.push(Segment {
            label,
            start: range.start,
            end: range.end,
        });
    }

    fn sickness(&mut self, window: Window) -> Result<PsdModel> {
        let range = window.sample_range(self.config.fs);
        let n = range.len();
        let grid = self.grid(n)?;
        let psd = add_colored_noise(
            build_sickness_psd(&self.draw, &grid)?,
            self.config.noise_scale,
            &mut stream_rng(self.seed, Stream::SicknessNoise),
        )?;
        let seg = psd_to_timeseries(&psd, n, &mut stream_rng(self.seed, Stream::SicknessPhases))?;
        self.splice(range, &seg, SegmentLabel::Sickness);
        Ok(psd)
    }

    fn arrhythmia(&mut self) -> Result<()> {
        let Some(window) = self.config.arrhythmia.filter(|w| !w.is_empty()) else {
            return Ok(());
        };
        let range = window.sample_range(self.config.fs);
        if range.is_empty() {
            return Ok(());
        }
        let n = range.len();
        let grid = self.grid(n)?;
        let psd = build_arrhythmia_psd(
            &self.draw,
            &grid,
            self.config.noise_scale,
            &mut stream_rng(self.seed, Stream::ArrhythmiaNoise),
        )?;
        let seg = psd_to_timeseries(&psd, n, &mut stream_rng(self.seed, Stream::ArrhythmiaPhases))?;
        self.splice(range, &seg, SegmentLabel::Arrhythmia);
        Ok(())
    }

    fn finish(self, variant: &str, priors: &KernelPriors) -> EggSignal {
        let config = GenerationConfig {
            seed: Some(self.seed),
            ..self.config.clone()
        };
        let metadata = GenerationMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            variant: variant.to_string(),
            seed: self.seed,
            config,
            priors: *priors,
            draw: self.draw,
            segments: self.segments,
        };
        EggSignal::new(self.samples, self.config.fs, metadata)
    }
}

/// Generates one recording: regular rhythm with an optional arrhythmia episode.
pub fn generate_egg(config: &GenerationConfig, priors: &KernelPriors) -> Result<GenerationOutput> {
    let mut synth = Synth::start(config, priors)?;
    let psd = synth.base()?;
    synth.arrhythmia()?;
    let signal = synth.finish("generate", priors);
    let features = extract_features(&signal.samples, signal.fs, &FeatureConfig::default()).ok();
    Ok(GenerationOutput {
        signal,
        psd,
        features,
    })
}

/// Generates a recording with a simulator-sickness episode.
///
/// The same kernel draw (one simulated subject) is used inside and outside
/// the episode. Uses [`GenerationConfig::DEFAULT_SICKNESS`] when
/// `config.sickness` is absent.
pub fn generate_egg_vr(config: &GenerationConfig, priors: &KernelPriors) -> Result<VrOutput> {
    let window = config.sickness.unwrap_or(GenerationConfig::DEFAULT_SICKNESS);
    if !(window.start_s < window.end_s) {
        return Err(invalid("sickness onset must precede offset"));
    }
    let config = GenerationConfig {
        sickness: Some(window),
        ..config.clone()
    };
    let mut synth = Synth::start(&config, priors)?;
    let normal_psd = synth.base()?;
    let range = window.sample_range(config.fs);
    if range.len() < 16 || range.start < 16 {
        return Err(invalid(
            "both the pre-onset part and the sickness window need at least 16 samples",
        ));
    }
    let sickness_psd = synth.sickness(window)?;
    synth.arrhythmia()?;
    let signal = synth.finish("generate-vr", priors);
    let fc = FeatureConfig::default();
    let before = extract_features(&signal.samples[..range.start], config.fs, &fc).ok();
    let during = extract_features(&signal.samples[range.clone()], config.fs, &fc).ok();
    Ok(VrOutput {
        signal,
        normal_psd,
        sickness_psd,
        before,
        during,
    })
}

/// Rebuilds a signal from its metadata.
pub fn regenerate(metadata: &GenerationMetadata) -> Result<EggSignal> {
    let mut config = metadata.config.clone();
    config.seed = Some(metadata.seed);
    match metadata.variant.as_str() {
        "generate" => Ok(generate_egg(&config, &metadata.priors)?.signal),
        "generate-vr" => Ok(generate_egg_vr(&config, &metadata.priors)?.signal),
        other => Err(invalid(format!("unknown variant {other:?}"))),
    }
}
