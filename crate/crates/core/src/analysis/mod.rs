//! Spectral estimation and feature extraction.
//!
//! Frequencies are Hz unless a name says cpm. Band edges are inclusive and
//! compared with a small relative tolerance, so a band such as 2-4 cpm keeps
//! the bins that sit exactly on its edges.

mod filter;
mod welch;

pub use filter::{butterworth_bandpass, Biquad, ButterworthBandpass};
pub use welch::{default_window_len, hamming, welch_psd, DEFAULT_OVERLAP};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::PsdModel;
use crate::{cpm_to_hz, hz_to_cpm};

/// Frequency bands, gastric rhythms in cpm, the rest in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    pub normo_cpm: (f64, f64),
    pub brady_cpm: (f64, f64),
    pub tachy_cpm: (f64, f64),
    pub breathing_hz: (f64, f64),
    /// Range used for total power, median frequency and crest factor.
    /// Defaults to the span of the three gastric rhythms, so the rhythm
    /// percentages add up to 100 and breathing does not pull the median.
    pub range_hz: (f64, f64),
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            normo_cpm: (2.0, 4.0),
            brady_cpm: (0.5, 2.0),
            tachy_cpm: (4.0, 9.0),
            breathing_hz: (0.2, 0.4),
            range_hz: (0.5 / 60.0, 9.0 / 60.0),
        }
    }
}

impl BandConfig {
    pub fn normo_hz(&self) -> (f64, f64) {
        to_hz(self.normo_cpm)
    }

    pub fn brady_hz(&self) -> (f64, f64) {
        to_hz(self.brady_cpm)
    }

    pub fn tachy_hz(&self) -> (f64, f64) {
        to_hz(self.tachy_cpm)
    }

    pub fn validate(&self) -> Result<()> {
        let bands = [
            ("normogastria", self.normo_hz()),
            ("bradygastria", self.brady_hz()),
            ("tachygastria", self.tachy_hz()),
            ("breathing", self.breathing_hz),
            ("analysis range", self.range_hz),
        ];
        for (name, (lo, hi)) in bands {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(invalid(format!("{name} band must satisfy 0 <= lo < hi")));
            }
        }
        let mut gastric = [self.brady_hz(), self.normo_hz(), self.tachy_hz()];
        gastric.sort_by(|a, b| a.0.total_cmp(&b.0));
        if gastric.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(invalid("gastric rhythm bands overlap"));
        }
        Ok(())
    }
}

fn to_hz((lo, hi): (f64, f64)) -> (f64, f64) {
    (cpm_to_hz(lo), cpm_to_hz(hi))
}

/// Spectral features of one recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub df_hz: f64,
    pub df_peak_width_hz: f64,
    pub br_peak_hz: Option<f64>,
    pub br_peak_width_hz: Option<f64>,
    pub total_power: f64,
    pub pct_normo: f64,
    pub pct_brady: f64,
    pub pct_tachy: f64,
    pub median_freq_hz: f64,
    pub crest_factor: f64,
}

/// Band-power part of a [`FeatureSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPowers {
    pub total_power: f64,
    pub pct_normo: f64,
    pub pct_brady: f64,
    pub pct_tachy: f64,
    pub median_freq_hz: f64,
    pub crest_factor: f64,
}

/// Full width at half maximum of a spectral peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakWidth {
    pub width_hz: f64,
    /// No half-magnitude crossing before the lower grid edge.
    pub left_clamped: bool,
    /// No half-magnitude crossing before the upper grid edge.
    pub right_clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mu_hz: f64,
    pub sigma_hz: f64,
}

/// Band-pass applied before spectral estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub order: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            lo_hz: 0.03,
            hi_hz: 0.6,
            order: 3,
        }
    }
}

/// How a raw signal is turned into features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub bands: BandConfig,
    /// Welch segment length; 12.5% of the signal when absent.
    pub window_len: Option<usize>,
    pub overlap: f64,
    pub filter: Option<FilterSpec>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            bands: BandConfig::default(),
            window_len: None,
            overlap: DEFAULT_OVERLAP,
            filter: None,
        }
    }
}

impl FeatureConfig {
    /// Optional filtering followed by the Welch estimate.
    pub fn spectrum(&self, x: &[f64], fs: f64) -> Result<PsdModel> {
        let filtered;
        let x = match self.filter {
            Some(f) => {
                filtered = butterworth_bandpass(x, fs, f.lo_hz, f.hi_hz, f.order)?;
                &filtered[..]
            }
            None => x,
        };
        let window = self.window_len.unwrap_or_else(|| default_window_len(x.len()));
        welch_psd(x, fs, window, self.overlap)
    }
}

/// Features of a raw signal.
pub fn extract_features(x: &[f64], fs: f64, config: &FeatureConfig) -> Result<FeatureSet> {
    let psd = config.spectrum(x, fs)?;
    features_from_psd(&psd, &config.bands)
}

/// Features of an already estimated spectrum.
pub fn features_from_psd(psd: &PsdModel, bands: &BandConfig) -> Result<FeatureSet> {
    bands.validate()?;
    let powers = band_features(psd, bands)?;
    let df_hz = dominant_frequency(psd, bands.normo_hz())?;
    let df_bin = climb(&psd.mags, psd.nearest_bin(df_hz));
    let df_peak_width_hz = fwhm_at(psd, df_bin).width_hz;

    let (br_peak_hz, br_peak_width_hz) = match breathing_peak(psd, bands) {
        Some(i) => (Some(psd.freqs[i]), Some(fwhm_at(psd, i).width_hz)),
        None => (None, None),
    };

    Ok(FeatureSet {
        df_hz,
        df_peak_width_hz,
        br_peak_hz,
        br_peak_width_hz,
        total_power: powers.total_power,
        pct_normo: powers.pct_normo,
        pct_brady: powers.pct_brady,
        pct_tachy: powers.pct_tachy,
        median_freq_hz: powers.median_freq_hz,
        crest_factor: powers.crest_factor,
    })
}

// A breathing peak is reported only when the band maximum is an interior
// local maximum that stands above numerical leakage.
fn breathing_peak(psd: &PsdModel, bands: &BandConfig) -> Option<usize> {
    let idx = band_bins(psd, bands.breathing_hz);
    if idx.len() < 3 {
        return None;
    }
    let i = argmax_lowest(&psd.mags, &idx);
    let interior = i != idx[0] && i != idx[idx.len() - 1];
    let floor = 1e-6 * psd.max();
    (interior && is_local_max(&psd.mags, i) && psd.mags[i] > floor).then_some(i)
}

fn band_tolerance(hi: f64) -> f64 {
    1e-9 * hi.abs().max(f64::MIN_POSITIVE)
}

/// Indices of bins inside `[lo, hi]`.
pub fn band_bins(psd: &PsdModel, (lo, hi): (f64, f64)) -> Vec<usize> {
    let eps = band_tolerance(hi);
    psd.freqs
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= lo - eps && f <= hi + eps)
        .map(|(i, _)| i)
        .collect()
}

fn argmax_lowest(mags: &[f64], idx: &[usize]) -> usize {
    let mut best = idx[0];
    for &i in idx {
        if mags[i] > mags[best] {
            best = i;
        }
    }
    best
}

fn is_local_max(mags: &[f64], i: usize) -> bool {
    i > 0 && i + 1 < mags.len() && mags[i] >= mags[i - 1] && mags[i] >= mags[i + 1] && mags[i] > 0.0
}

// Walks uphill to the nearest local maximum.
fn climb(mags: &[f64], mut i: usize) -> usize {
    loop {
        if i + 1 < mags.len() && mags[i + 1] > mags[i] {
            i += 1;
        } else if i > 0 && mags[i - 1] > mags[i] {
            i -= 1;
        } else {
            return i;
        }
    }
}

/// Frequency of the largest magnitude inside `band`; ties go to the lower frequency.
pub fn dominant_frequency(psd: &PsdModel, band: (f64, f64)) -> Result<f64> {
    let idx = band_bins(psd, band);
    if idx.is_empty() {
        return Err(Error::UndefinedFeatures(format!(
            "band {:.4}-{:.4} Hz contains no spectral bins",
            band.0, band.1
        )));
    }
    Ok(psd.freqs[argmax_lowest(&psd.mags, &idx)])
}

/// FWHM of the peak at the bin nearest `peak_freq`, which must be a local maximum.
pub fn peak_width(psd: &PsdModel, peak_freq: f64) -> Result<PeakWidth> {
    let i = psd.nearest_bin(peak_freq);
    if !is_local_max(&psd.mags, i) {
        return Err(invalid(format!(
            "{:.5} Hz is not a local maximum of the spectrum",
            psd.freqs[i]
        )));
    }
    Ok(fwhm_at(psd, i))
}

fn fwhm_at(psd: &PsdModel, i: usize) -> PeakWidth {
    let (f, m) = (&psd.freqs, &psd.mags);
    let half = m[i] / 2.0;
    let cross = |a: usize, b: usize| f[a] + (half - m[a]) / (m[b] - m[a]) * (f[b] - f[a]);

    let left = (0..i).rev().find(|&j| m[j] < half);
    let right = (i + 1..m.len()).find(|&j| m[j] < half);
    let (lo, left_clamped) = match left {
        Some(j) => (cross(j, j + 1), false),
        None => (f[0], true),
    };
    let (hi, right_clamped) = match right {
        Some(j) => (cross(j - 1, j), false),
        None => (f[f.len() - 1], true),
    };
    PeakWidth {
        width_hz: hi - lo,
        left_clamped,
        right_clamped,
    }
}

fn interp(psd: &PsdModel, x: f64) -> f64 {
    let f = &psd.freqs;
    match f.partition_point(|&v| v <= x) {
        0 => psd.mags[0],
        k if k == f.len() => psd.mags[f.len() - 1],
        k => {
            let t = (x - f[k - 1]) / (f[k] - f[k - 1]);
            psd.mags[k - 1] + t * (psd.mags[k] - psd.mags[k - 1])
        }
    }
}

// Breakpoints of the piecewise-linear spectrum restricted to [lo, hi].
fn segment_points(psd: &PsdModel, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(lo, interp(psd, lo))];
    pts.extend(
        psd.freqs
            .iter()
            .zip(&psd.mags)
            .filter(|(&f, _)| f > lo && f < hi)
            .map(|(&f, &m)| (f, m)),
    );
    pts.push((hi, interp(psd, hi)));
    pts
}

/// Trapezoidal integral over `[lo, hi]` clipped to the grid.
pub fn band_power(psd: &PsdModel, (lo, hi): (f64, f64)) -> f64 {
    let lo = lo.max(psd.freqs[0]);
    let hi = hi.min(psd.freqs[psd.len() - 1]);
    if !(hi > lo) {
        return 0.0;
    }
    segment_points(psd, lo, hi)
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

/// Total power, rhythm percentages, median frequency and crest factor over
/// the analysis range.
pub fn band_features(psd: &PsdModel, bands: &BandConfig) -> Result<BandPowers> {
    bands.validate()?;
    let lo = bands.range_hz.0.max(psd.freqs[0]);
    let hi = bands.range_hz.1.min(psd.freqs[psd.len() - 1]);
    if !(hi > lo) {
        return Err(invalid("analysis range does not overlap the spectrum"));
    }
    let pts = segment_points(psd, lo, hi);
    let mut cum = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for w in pts.windows(2) {
        acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        cum.push(acc);
    }
    let total_power = acc;
    if !(total_power > 0.0) {
        return Err(Error::UndefinedFeatures(
            "spectrum has no power in the analysis range".into(),
        ));
    }

    let pct = |band: (f64, f64)| {
        let clipped = (band.0.max(lo), band.1.min(hi));
        100.0 * band_power(psd, clipped) / total_power
    };

    let target = 0.5 * total_power;
    let k = cum.partition_point(|&c| c < target).clamp(1, cum.len() - 1);
    let (c0, c1) = (cum[k - 1], cum[k]);
    let (f0, f1) = (pts[k - 1].0, pts[k].0);
    let median_freq_hz = if c1 > c0 {
        f0 + (target - c0) / (c1 - c0) * (f1 - f0)
    } else {
        f0
    };

    let in_range = band_bins(psd, (lo, hi));
    let peak = in_range.iter().map(|&i| psd.mags[i]).fold(0.0, f64::max);
    let rms = (in_range.iter().map(|&i| psd.mags[i].powi(2)).sum::<f64>()
        / in_range.len().max(1) as f64)
        .sqrt();
    let crest_factor = if rms > 0.0 { peak / rms } else { f64::NAN };

    Ok(BandPowers {
        total_power,
        pct_normo: pct(bands.normo_hz()),
        pct_brady: pct(bands.brady_hz()),
        pct_tachy: pct(bands.tachy_hz()),
        median_freq_hz,
        crest_factor,
    })
}

/// Magnitude-weighted mean and standard deviation of the spectrum inside `band`.
pub fn fit_gaussian_weighted(psd: &PsdModel, band: (f64, f64)) -> Result<GaussianFit> {
    let idx = band_bins(psd, band);
    let mass: f64 = idx.iter().map(|&i| psd.mags[i]).sum();
    if idx.is_empty() || !(mass > 0.0) {
        return Err(Error::UndefinedFeatures(format!(
            "no spectral mass between {:.3} and {:.3} cpm",
            hz_to_cpm(band.0),
            hz_to_cpm(band.1)
        )));
    }
    let mu_hz = idx.iter().map(|&i| psd.freqs[i] * psd.mags[i]).sum::<f64>() / mass;
    let var = idx
        .iter()
        .map(|&i| psd.mags[i] * (psd.freqs[i] - mu_hz).powi(2))
        .sum::<f64>()
        / mass;
    Ok(GaussianFit {
        mu_hz,
        sigma_hz: var.sqrt(),
    })
}
