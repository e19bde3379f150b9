//! Welch power spectral density estimate.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::model::PsdModel;

/// Default segment overlap.
pub const DEFAULT_OVERLAP: f64 = 0.5;

/// Default segment length: 12.5% of the signal.
pub fn default_window_len(n_samples: usize) -> usize {
    ((0.125 * n_samples as f64).round() as usize).max(1)
}

/// Symmetric Hamming window.
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / m).cos())
        .collect()
}

/// Averaged Hamming-windowed periodogram, one-sided, per Hz.
///
/// Segments of `window_len` samples advance by `window_len - round(overlap * window_len)`.
/// Each periodogram is scaled by `1 / (fs * sum(w^2))` and interior bins are
/// doubled, so summing the result times `fs / window_len` recovers the mean
/// power of the signal.
pub fn welch_psd(x: &[f64], fs: f64, window_len: usize, overlap: f64) -> Result<PsdModel> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(invalid("sampling rate must be positive"));
    }
    if window_len == 0 || window_len > x.len() {
        return Err(invalid(format!(
            "window of {window_len} samples does not fit a signal of {}",
            x.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(invalid("overlap must lie in [0, 1)"));
    }
    let step = (window_len - (overlap * window_len as f64).round() as usize).max(1);
    let n_seg = (x.len() - window_len) / step + 1;
    let window = hamming(window_len);
    let power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(window_len);

    let bins = window_len / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); window_len];
    for s in 0..n_seg {
        let seg = &x[s * step..s * step + window_len];
        for ((b, &v), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
    }

    let scale = 1.0 / (fs * power * n_seg as f64);
    let freqs = (0..bins)
        .map(|m| m as f64 * fs / window_len as f64)
        .collect();
    let mags = acc
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            let one_sided = if m == 0 || 2 * m == window_len { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    Ok(PsdModel { freqs, mags })
}
