//! Spectral model of a synthetic EGG.
//!
//! All kernel parameters are carried in cycles per minute (cpm) and converted
//! to Hz only when a spectrum is evaluated on a frequency grid.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cpm_to_hz;
use crate::error::{invalid, Result};

/// Lower bound for drawn kernel widths, cpm.
pub const SIGMA_FLOOR_CPM: f64 = 0.05;

/// Magnitude gain applied to the whole spectrum during sickness.
pub const SICKNESS_GAIN: f64 = 2.2;

/// Horizontal stretch of the normogastria kernel beyond `mu + sigma` during sickness.
pub const SICKNESS_STRETCH: f64 = 4.0;

/// Colored-noise scale used for arrhythmia segments when the user scale is zero.
pub const ARRHYTHMIA_NOISE_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    Fasting,
    Postprandial,
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            State::Fasting => "fasting",
            State::Postprandial => "postprandial",
        })
    }
}

/// Normal prior given by its mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub mean: f64,
    pub sd: f64,
}

impl Prior {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Validated beforehand, so construction cannot fail.
        Normal::new(self.mean, self.sd)
            .expect("validated prior")
            .sample(rng)
    }
}

/// Population priors of the kernel parameters, in cpm (magnitude dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPriors {
    pub mu_df_fasting: Prior,
    pub mu_df_postprandial: Prior,
    pub sigma_df_fasting: Prior,
    pub sigma_df_postprandial: Prior,
    pub mu_br: Prior,
    pub sigma_br: Prior,
    pub rel_mag_br: Prior,
}

impl Default for KernelPriors {
    fn default() -> Self {
        Self {
            mu_df_fasting: Prior::new(2.9336, 0.1094),
            mu_df_postprandial: Prior::new(2.9743, 0.1158),
            sigma_df_fasting: Prior::new(0.4836, 0.0740),
            sigma_df_postprandial: Prior::new(0.4794, 0.0823),
            mu_br: Prior::new(16.7410, 1.0628),
            sigma_br: Prior::new(2.6655, 0.4919),
            rel_mag_br: Prior::new(0.1907, 0.2474),
        }
    }
}

impl KernelPriors {
    pub fn mu_df(&self, state: State) -> Prior {
        match state {
            State::Fasting => self.mu_df_fasting,
            State::Postprandial => self.mu_df_postprandial,
        }
    }

    pub fn sigma_df(&self, state: State) -> Prior {
        match state {
            State::Fasting => self.sigma_df_fasting,
            State::Postprandial => self.sigma_df_postprandial,
        }
    }

    /// Same priors with every standard deviation set to zero.
    pub fn without_variability(&self) -> Self {
        let fix = |p: Prior| Prior::new(p.mean, 0.0);
        Self {
            mu_df_fasting: fix(self.mu_df_fasting),
            mu_df_postprandial: fix(self.mu_df_postprandial),
            sigma_df_fasting: fix(self.sigma_df_fasting),
            sigma_df_postprandial: fix(self.sigma_df_postprandial),
            mu_br: fix(self.mu_br),
            sigma_br: fix(self.sigma_br),
            rel_mag_br: fix(self.rel_mag_br),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mu_df_fasting", self.mu_df_fasting),
            ("mu_df_postprandial", self.mu_df_postprandial),
            ("sigma_df_fasting", self.sigma_df_fasting),
            ("sigma_df_postprandial", self.sigma_df_postprandial),
            ("mu_br", self.mu_br),
            ("sigma_br", self.sigma_br),
            ("rel_mag_br", self.rel_mag_br),
        ];
        for (name, p) in named {
            if !(p.mean.is_finite() && p.mean > 0.0) {
                return Err(invalid(format!("prior {name}: mean must be positive")));
            }
            if !(p.sd.is_finite() && p.sd >= 0.0) {
                return Err(invalid(format!("prior {name}: sd must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// One realized set of kernel parameters (a simulated subject), cpm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDraw {
    pub state: State,
    pub mu_df: f64,
    pub sigma_df: f64,
    pub mu_br: f64,
    pub sigma_br: f64,
    pub rel_mag_br: f64,
    pub breathing_enabled: bool,
}

impl KernelDraw {
    /// Draw with every parameter at its prior mean.
    pub fn mean(priors: &KernelPriors, state: State, breathing_enabled: bool) -> Self {
        Self {
            state,
            mu_df: priors.mu_df(state).mean,
            sigma_df: priors.sigma_df(state).mean.max(SIGMA_FLOOR_CPM),
            mu_br: priors.mu_br.mean,
            sigma_br: priors.sigma_br.mean.max(SIGMA_FLOOR_CPM),
            rel_mag_br: priors.rel_mag_br.mean,
            breathing_enabled,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu_df > 0.0 && self.mu_br > 0.0) {
            return Err(invalid("kernel centers must be positive"));
        }
        if !(self.sigma_df > 0.0 && self.sigma_br > 0.0) {
            return Err(invalid("kernel widths must be positive"));
        }
        if !(self.rel_mag_br >= 0.0 && self.rel_mag_br.is_finite()) {
            return Err(invalid("breathing magnitude must be nonnegative"));
        }
        Ok(())
    }

    fn breathing_weight(&self) -> f64 {
        if self.breathing_enabled {
            self.rel_mag_br
        } else {
            0.0
        }
    }
}

/// One-sided FFT grid of an `n_samples` long signal sampled at `fs` Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n_samples: usize,
    pub fs: f64,
}

impl FrequencyGrid {
    pub fn new(n_samples: usize, fs: f64) -> Result<Self> {
        if n_samples == 0 {
            return Err(invalid("frequency grid needs at least one sample"));
        }
        if !(fs.is_finite() && fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        Ok(Self { n_samples, fs })
    }

    pub fn n_bins(&self) -> usize {
        self.n_samples / 2 + 1
    }

    pub fn resolution(&self) -> f64 {
        self.fs / self.n_samples as f64
    }

    pub fn freqs(&self) -> Vec<f64> {
        let n = self.n_samples as f64;
        (0..self.n_bins()).map(|m| m as f64 * self.fs / n).collect()
    }
}

/// Sampled one-sided spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdModel {
    /// Bin frequencies, Hz, ascending.
    pub freqs: Vec<f64>,
    /// Nonnegative magnitudes, one per bin.
    pub mags: Vec<f64>,
}

impl PsdModel {
    pub fn new(freqs: Vec<f64>, mags: Vec<f64>) -> Result<Self> {
        if freqs.len() != mags.len() {
            return Err(invalid("frequency and magnitude lengths differ"));
        }
        if freqs.is_empty() {
            return Err(invalid("empty spectrum"));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("frequencies must be strictly increasing"));
        }
        if mags.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(invalid("magnitudes must be finite and nonnegative"));
        }
        Ok(Self { freqs, mags })
    }

    pub fn len(&self) -> usize {
        self.mags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mags.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.mags.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the bin closest to `f`.
    pub fn nearest_bin(&self, f: f64) -> usize {
        let mut best = 0;
        for (i, &fi) in self.freqs.iter().enumerate() {
            if (fi - f).abs() < (self.freqs[best] - f).abs() {
                best = i;
            }
        }
        best
    }

    fn zero_dc(&mut self) {
        if self.freqs[0] == 0.0 {
            self.mags[0] = 0.0;
        }
    }
}

/// Peak-one Gaussian `exp(-(f - mu)^2 / (2 sigma^2))`.
pub fn gaussian_kernel(f: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("kernel width must be positive"));
    }
    Ok(gauss(f, mu, sigma))
}

#[inline]
fn gauss(f: f64, mu: f64, sigma: f64) -> f64 {
    let z = (f - mu) / sigma;
    (-0.5 * z * z).exp()
}

/// Draws one subject's kernel parameters from the priors for `state`.
///
/// All five parameters are drawn, in a fixed order, whether or not breathing
/// is enabled so the stream position never depends on flags.
pub fn draw_kernels<R: Rng + ?Sized>(
    priors: &KernelPriors,
    state: State,
    breathing_enabled: bool,
    rng: &mut R,
) -> Result<KernelDraw> {
    priors.validate()?;
    let mu_df = priors.mu_df(state).sample(rng);
    let sigma_df = priors.sigma_df(state).sample(rng);
    let mu_br = priors.mu_br.sample(rng);
    let sigma_br = priors.sigma_br.sample(rng);
    let rel_mag_br = priors.rel_mag_br.sample(rng);
    Ok(KernelDraw {
        state,
        // A center can only go nonpositive five or more SDs out; keep it on the grid.
        mu_df: mu_df.max(SIGMA_FLOOR_CPM),
        sigma_df: sigma_df.max(SIGMA_FLOOR_CPM),
        mu_br: mu_br.max(SIGMA_FLOOR_CPM),
        sigma_br: sigma_br.max(SIGMA_FLOOR_CPM),
        rel_mag_br: rel_mag_br.max(0.0),
        breathing_enabled,
    })
}

fn breathing_term(draw: &KernelDraw, f: f64) -> f64 {
    let w = draw.breathing_weight();
    if w == 0.0 {
        0.0
    } else {
        w * gauss(f, cpm_to_hz(draw.mu_br), cpm_to_hz(draw.sigma_br))
    }
}

/// Normogastria kernel plus (optionally) the breathing kernel.
pub fn build_psd(draw: &KernelDraw, grid: &FrequencyGrid) -> Result<PsdModel> {
    draw.validate()?;
    let mu = cpm_to_hz(draw.mu_df);
    let sigma = cpm_to_hz(draw.sigma_df);
    let freqs = grid.freqs();
    let mags = freqs
        .iter()
        .map(|&f| gauss(f, mu, sigma) + breathing_term(draw, f))
        .collect();
    let mut psd = PsdModel { freqs, mags };
    psd.zero_dc();
    Ok(psd)
}

/// Sickness spectrum: normogastria tail stretched beyond `mu + sigma`, whole
/// spectrum scaled by [`SICKNESS_GAIN`].
pub fn build_sickness_psd(draw: &KernelDraw, grid: &FrequencyGrid) -> Result<PsdModel> {
    draw.validate()?;
    let mu = cpm_to_hz(draw.mu_df);
    let sigma = cpm_to_hz(draw.sigma_df);
    let knee = mu + sigma;
    let freqs = grid.freqs();
    let mags = freqs
        .iter()
        .map(|&f| {
            let g = if f <= knee {
                gauss(f, mu, sigma)
            } else {
                gauss(knee + (f - knee) / SICKNESS_STRETCH, mu, sigma)
            };
            SICKNESS_GAIN * (g + breathing_term(draw, f))
        })
        .collect();
    let mut psd = PsdModel { freqs, mags };
    psd.zero_dc();
    Ok(psd)
}

/// Arrhythmia spectrum: breathing kernel over a colored-noise floor, no gastric rhythm.
///
/// The floor uses `noise_scale` when positive, else [`ARRHYTHMIA_NOISE_FLOOR`],
/// measured against the unit normogastria peak of a regular spectrum.
pub fn build_arrhythmia_psd<R: Rng + ?Sized>(
    draw: &KernelDraw,
    grid: &FrequencyGrid,
    noise_scale: f64,
    rng: &mut R,
) -> Result<PsdModel> {
    draw.validate()?;
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(invalid("noise scale must be nonnegative"));
    }
    let scale = if noise_scale > 0.0 {
        noise_scale
    } else {
        ARRHYTHMIA_NOISE_FLOOR
    };
    let freqs = grid.freqs();
    let mags = freqs.iter().map(|&f| breathing_term(draw, f)).collect();
    let psd = PsdModel { freqs, mags };
    add_noise_floor(psd, scale, 1.0, rng)
}

/// Median-filter window used for colored noise: 1% of the bins, odd, at least 3.
pub fn noise_window(n_bins: usize) -> usize {
    let w = (0.01 * n_bins as f64).round() as usize;
    let w = if w.is_multiple_of(2) { w + 1 } else { w };
    w.max(3)
}

/// Adds median-smoothed uniform noise with amplitude up to `scale * max(mags)`.
pub fn add_colored_noise<R: Rng + ?Sized>(
    psd: PsdModel,
    scale: f64,
    rng: &mut R,
) -> Result<PsdModel> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(invalid("noise scale must be nonnegative"));
    }
    let peak = psd.max();
    add_noise_floor(psd, scale, peak, rng)
}

fn add_noise_floor<R: Rng + ?Sized>(
    mut psd: PsdModel,
    scale: f64,
    reference_peak: f64,
    rng: &mut R,
) -> Result<PsdModel> {
    if psd.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    if scale == 0.0 {
        return Ok(psd);
    }
    let upper = scale * reference_peak;
    let raw: Vec<f64> = (0..psd.len()).map(|_| rng.random::<f64>() * upper).collect();
    let floor = median_filter(&raw, noise_window(raw.len()));
    for (m, n) in psd.mags.iter_mut().zip(floor) {
        *m += n;
    }
    psd.zero_dc();
    Ok(psd)
}

/// Centered running median with odd `window`; edges replicate the boundary values.
pub fn median_filter(x: &[f64], window: usize) -> Vec<f64> {
    debug_assert!(window % 2 == 1);
    let half = (window / 2) as isize;
    let last = x.len() as isize - 1;
    let mut buf = Vec::with_capacity(window);
    (0..x.len() as isize)
        .map(|i| {
            buf.clear();
            buf.extend((i - half..=i + half).map(|j| x[j.clamp(0, last) as usize]));
            buf.sort_unstable_by(f64::total_cmp);
            buf[half as usize]
        })
        .collect()
}
