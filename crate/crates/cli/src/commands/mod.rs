pub mod analyze;
pub mod fit;
pub mod generate;
pub mod montecarlo;

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::format::{read_metadata, read_signal, sidecar_path};

/// Loads a signal and settles its sampling rate: the flag wins, then the
/// metadata sidecar, then the step of the time column.
pub fn load_signal(path: &Path, fs_flag: Option<f64>) -> CliResult<(Vec<f64>, f64)> {
    let file = read_signal(path)?;
    let fs = match fs_flag {
        Some(fs) => fs,
        None => {
            let meta = sidecar_path(path);
            if meta.exists() {
                read_metadata(&meta)?.config.fs
            } else if let Some(t) = &file.times {
                fs_from_times(t)?
            } else {
                return Err(CliError::Usage(format!(
                    "{}: single-column input needs --fs",
                    path.display()
                )));
            }
        }
    };
    if !(fs.is_finite() && fs > 0.0) {
        return Err(CliError::Usage(format!("sampling rate must be positive (got {fs})")));
    }
    Ok((file.samples, fs))
}

/// Sampling rate implied by an evenly spaced time column.
fn fs_from_times(t: &[f64]) -> CliResult<f64> {
    if t.len() < 2 {
        return Err(CliError::Usage("need at least two samples to infer fs; pass --fs".into()));
    }
    let span = t[t.len() - 1] - t[0];
    let step = span / (t.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(CliError::Usage("time column must be strictly increasing".into()));
    }
    // Times carry 9 significant digits, so allow that much jitter.
    let tol = 1e-8 * t[t.len() - 1].abs().max(step) + 1e-6 * step;
    for (i, w) in t.windows(2).enumerate() {
        if (w[1] - w[0] - step).abs() > tol {
            return Err(CliError::Usage(format!(
                "row {}: time column is not evenly spaced",
                i + 3
            )));
        }
    }
    Ok(1.0 / step)
}
