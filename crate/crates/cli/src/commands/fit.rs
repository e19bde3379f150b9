use eggsynth::analysis::{fit_gaussian_weighted, FeatureConfig, FilterSpec};
use serde::Serialize;

use super::load_signal;
use crate::error::{CliError, CliResult};
use crate::format::{is_psd_file, read_psd, to_json};
use crate::FitArgs;

#[derive(Serialize)]
struct FitReport {
    mu_cpm: f64,
    sigma_cpm: f64,
    mu_hz: f64,
    sigma_hz: f64,
    band_cpm: (f64, f64),
    /// `psd` or `signal`.
    source: &'static str,
    /// Spectral resolution of the fitted PSD in Hz.
    resolution_hz: f64,
}

pub fn run(a: &FitArgs) -> CliResult<String> {
    let (lo, hi) = a.band;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(CliError::Usage(format!("fit band must satisfy 0 <= lo < hi (got {lo},{hi})")));
    }
    let (psd, source) = if is_psd_file(&a.input)? {
        (read_psd(&a.input)?, "psd")
    } else {
        let (x, fs) = load_signal(&a.input, a.fs)?;
        let config = FeatureConfig {
            window_len: a.window,
            filter: a.filter.is_on().then(FilterSpec::default),
            ..Default::default()
        };
        (config.spectrum(&x, fs)?, "signal")
    };
    let fit = fit_gaussian_weighted(&psd, (lo / 60.0, hi / 60.0))?;
    let resolution_hz = if psd.len() > 1 { psd.freqs[1] - psd.freqs[0] } else { 0.0 };
    Ok(to_json(&FitReport {
        mu_cpm: fit.mu_hz * 60.0,
        sigma_cpm: fit.sigma_hz * 60.0,
        mu_hz: fit.mu_hz,
        sigma_hz: fit.sigma_hz,
        band_cpm: a.band,
        source,
        resolution_hz,
    }))
}
