use eggsynth::analysis::{features_from_psd, FeatureConfig, FilterSpec};

use super::load_signal;
use crate::error::CliResult;
use crate::format::{to_json, write_psd};
use crate::AnalyzeArgs;

pub fn run(a: &AnalyzeArgs) -> CliResult<String> {
    let (x, fs) = load_signal(&a.input, a.fs)?;
    let config = FeatureConfig {
        window_len: a.window,
        filter: a.filter.then(FilterSpec::default),
        ..Default::default()
    };
    let psd = config.spectrum(&x, fs)?;
    if let Some(path) = &a.psd_out {
        write_psd(path, &psd)?;
    }
    Ok(to_json(&features_from_psd(&psd, &config.bands)?))
}
