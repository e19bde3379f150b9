//! Browser bindings: JSON in, JSON out.
//!
//! Each exported function has a plain Rust twin (`*_json`) so the logic is
//! testable without a JavaScript host.

use eggsynth::analysis::FeatureConfig;
use eggsynth::stats::{run_monte_carlo, McMode, MonteCarloConfig, MonteCarloReport};
use eggsynth::synthesis::Window;
use eggsynth::{
    generate_egg, generate_egg_vr, FeatureSet, GenerationConfig, KernelDraw, KernelPriors, State,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest replication count the page will run on the UI thread.
pub const MAX_BROWSER_REPS: usize = 200_000;

#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct DemoRequest {
    pub duration: f64,
    pub fs: f64,
    pub state: State,
    pub breathing: bool,
    pub seed: u64,
    pub noise: f64,
    /// `[start, end]` in seconds.
    pub arrhythmia: Option<(f64, f64)>,
    pub onset: f64,
    pub offset: f64,
}

impl Default for DemoRequest {
    fn default() -> Self {
        Self {
            duration: 1200.0,
            fs: 2.0,
            state: State::Fasting,
            breathing: true,
            seed: 1,
            noise: 0.0,
            arrhythmia: None,
            onset: 600.0,
            offset: 1200.0,
        }
    }
}

impl DemoRequest {
    fn config(&self) -> GenerationConfig {
        GenerationConfig {
            duration: self.duration,
            fs: self.fs,
            state: self.state,
            breathing: self.breathing,
            plot: false,
            seed: Some(self.seed),
            arrhythmia: self.arrhythmia.map(|(a, b)| Window::new(a, b)),
            noise_scale: self.noise,
            sickness: None,
        }
    }
}

#[derive(Serialize)]
struct Spectrum {
    freqs_cpm: Vec<f64>,
    psd: Vec<f64>,
}

fn spectrum(x: &[f64], fs: f64) -> Result<Spectrum, String> {
    let p = FeatureConfig::default()
        .spectrum(x, fs)
        .map_err(|e| e.to_string())?;
    Ok(Spectrum {
        freqs_cpm: p.freqs.iter().map(|f| f * 60.0).collect(),
        psd: p.mags,
    })
}

#[derive(Serialize)]
struct GenerateResponse {
    fs: f64,
    samples: Vec<f64>,
    labels: Vec<eggsynth::SegmentLabel>,
    draw: KernelDraw,
    spectrum: Spectrum,
    features: Option<FeatureSet>,
}

#[derive(Serialize)]
struct VrResponse {
    fs: f64,
    samples: Vec<f64>,
    labels: Vec<eggsynth::SegmentLabel>,
    draw: KernelDraw,
    onset_index: usize,
    offset_index: usize,
    before_spectrum: Spectrum,
    during_spectrum: Spectrum,
    before: Option<FeatureSet>,
    during: Option<FeatureSet>,
}

fn parse(request: &str) -> Result<DemoRequest, String> {
    if request.trim().is_empty() {
        return Ok(DemoRequest::default());
    }
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn generate_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let out = generate_egg(&req.config(), &KernelPriors::default()).map_err(|e| e.to_string())?;
    let s = out.signal;
    to_json(&GenerateResponse {
        fs: s.fs,
        spectrum: spectrum(&s.samples, s.fs)?,
        draw: s.metadata.draw,
        samples: s.samples,
        labels: s.labels,
        features: out.features,
    })
}

pub fn generate_vr_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let window = Window::new(req.onset, req.offset);
    let config = GenerationConfig {
        sickness: Some(window),
        ..req.config()
    };
    let out = generate_egg_vr(&config, &KernelPriors::default()).map_err(|e| e.to_string())?;
    let s = out.signal;
    let r = window.sample_range(s.fs);
    to_json(&VrResponse {
        fs: s.fs,
        before_spectrum: spectrum(&s.samples[..r.start], s.fs)?,
        during_spectrum: spectrum(&s.samples[r.clone()], s.fs)?,
        onset_index: r.start,
        offset_index: r.end,
        draw: s.metadata.draw,
        samples: s.samples,
        labels: s.labels,
        before: out.before,
        during: out.during,
    })
}

pub fn monte_carlo_json(n: usize, reps: usize, seed: u64) -> Result<String, String> {
    if reps > MAX_BROWSER_REPS {
        return Err(format!("at most {MAX_BROWSER_REPS} replications in the browser"));
    }
    let config = MonteCarloConfig {
        n_per_group: n,
        replications: reps,
        mode: McMode::Fast,
        seed,
        ..Default::default()
    };
    let report: MonteCarloReport =
        run_monte_carlo(&config, &KernelPriors::default()).map_err(|e| e.to_string())?;
    to_json(&report)
}

/// Generates a recording; see [`DemoRequest`] for the accepted fields.
#[wasm_bindgen]
pub fn generate(request: &str) -> Result<String, JsValue> {
    generate_json(request).map_err(|e| JsValue::from_str(&e))
}

/// Generates a recording with a sickness episode between `onset` and `offset`.
#[wasm_bindgen]
pub fn generate_vr(request: &str) -> Result<String, JsValue> {
    generate_vr_json(request).map_err(|e| JsValue::from_str(&e))
}

/// Fast-mode paired t-test simulation.
#[wasm_bindgen]
pub fn monte_carlo(n: usize, reps: usize, seed: u64) -> Result<String, JsValue> {
    monte_carlo_json(n, reps, seed).map_err(|e| JsValue::from_str(&e))
}
