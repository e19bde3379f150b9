use std::fs;
use std::path::Path;

use eggsynth::analysis::{extract_features, FeatureConfig};
use eggsynth::synthesis::{regenerate, Window};
use eggsynth::{generate_egg, generate_egg_vr, FeatureSet, GenerationConfig, KernelPriors};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::format::{quantize, sidecar_path, to_json, with_suffix, write_metadata, write_signal};
use crate::svg::{line_chart, Series};
use crate::{GenerateArgs, GenerateVrArgs, RegenerateArgs, SignalArgs};

fn config(a: &SignalArgs) -> GenerationConfig {
    GenerationConfig {
        duration: a.duration,
        fs: a.fs,
        state: a.state.into(),
        breathing: a.breathing.is_on(),
        plot: a.plot,
        seed: a.seed,
        arrhythmia: a.arrhythmia.map(|(s, e)| Window::new(s, e)),
        noise_scale: a.noise,
        sickness: None,
    }
}

/// Features of the samples exactly as written to disk, so that analyzing
/// the file reproduces them. Files are written first: a recording too short
/// for the feature bands is still produced, with exit code 3.
fn file_features(quantized: &[f64], fs: f64) -> CliResult<FeatureSet> {
    Ok(extract_features(quantized, fs, &FeatureConfig::default())?)
}

pub fn run(a: &GenerateArgs) -> CliResult<String> {
    let out = generate_egg(&config(&a.signal), &KernelPriors::default())?;
    let s = &out.signal;
    let q: Vec<f64> = s.samples.iter().map(|&x| quantize(x)).collect();
    write_outputs(&a.signal, &q, s.fs, &s.metadata)?;
    if a.signal.plot {
        plot(&a.signal.out, &q, s.fs, &[("signal", &q[..])])?;
    }
    Ok(to_json(&file_features(&q, s.fs)?))
}

#[derive(Serialize)]
struct VrFeatures {
    before: FeatureSet,
    during: FeatureSet,
}

pub fn run_vr(a: &GenerateVrArgs) -> CliResult<String> {
    let mut cfg = config(&a.signal);
    let window = Window::new(a.onset, a.offset);
    cfg.sickness = Some(window);
    let out = generate_egg_vr(&cfg, &KernelPriors::default())?;
    let s = &out.signal;
    let q: Vec<f64> = s.samples.iter().map(|&x| quantize(x)).collect();
    let range = window.sample_range(s.fs);
    let (before, during) = (&q[..range.start], &q[range.clone()]);
    write_outputs(&a.signal, &q, s.fs, &s.metadata)?;
    if a.signal.plot {
        plot(
            &a.signal.out,
            &q,
            s.fs,
            &[("before sickness", before), ("during sickness", during)],
        )?;
    }
    Ok(to_json(&VrFeatures {
        before: file_features(before, s.fs)?,
        during: file_features(during, s.fs)?,
    }))
}

pub fn run_regenerate(a: &RegenerateArgs) -> CliResult<String> {
    let meta = crate::format::read_metadata(&a.meta)?;
    let signal = regenerate(&meta)?;
    let q: Vec<f64> = signal.samples.iter().map(|&x| quantize(x)).collect();
    write_signal(&a.out, &q, signal.fs, a.format)?;
    Ok(String::new())
}

fn write_outputs(
    a: &SignalArgs,
    q: &[f64],
    fs: f64,
    meta: &eggsynth::GenerationMetadata,
) -> CliResult<()> {
    write_signal(&a.out, q, fs, a.format)?;
    write_metadata(&sidecar_path(&a.out), meta)
}

/// Time series plus Welch spectra of the given pieces.
fn plot(out: &Path, q: &[f64], fs: f64, pieces: &[(&str, &[f64])]) -> CliResult<()> {
    let t: Vec<f64> = (0..q.len()).map(|i| i as f64 / fs).collect();
    let signal = line_chart(
        "EGG signal",
        "time [s]",
        "amplitude [a.u.]",
        &[Series { name: "egg", x: &t, y: q }],
    );
    let spectra = pieces
        .iter()
        .map(|(name, x)| Ok((*name, FeatureConfig::default().spectrum(x, fs)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let cpm: Vec<Vec<f64>> = spectra
        .iter()
        .map(|(_, p)| p.freqs.iter().map(|f| f * 60.0).collect())
        .collect();
    let series: Vec<Series> = spectra
        .iter()
        .zip(&cpm)
        .map(|((name, p), x)| Series { name, x, y: &p.mags })
        .collect();
    let psd = line_chart("Welch PSD", "frequency [cpm]", "PSD [a.u./Hz]", &series);
    for (suffix, body) in [("signal.svg", signal), ("psd.svg", psd)] {
        let path = with_suffix(out, suffix);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
