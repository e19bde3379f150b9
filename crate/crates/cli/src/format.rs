//! File formats: signal CSV/JSON, PSD CSV and the metadata sidecar.
//!
//! Numbers are written with 9 significant digits in `%g` style, `.` as the
//! decimal separator and LF line endings.

use std::fs;
use std::path::{Path, PathBuf};

use eggsynth::{GenerationMetadata, PsdModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SIGNIFICANT_DIGITS: usize = 9;
pub const SIGNAL_HEADER: &str = "time_s,egg_au";
pub const PSD_HEADER: &str = "freq_hz,psd";

/// `%.9g`: fixed notation for decimal exponents in [-5, 9), scientific
/// otherwise, trailing zeros removed.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let p = SIGNIFICANT_DIGITS as i32;
    let sci = format!("{:.*e}", (p - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= p {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The value a reader of [`fmt_num`]'s output gets back.
pub fn quantize(v: f64) -> f64 {
    fmt_num(v).parse().expect("formatted number parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SignalFormat {
    Csv,
    Json,
}

/// JSON flavour of the signal file.
#[derive(Debug, Serialize, Deserialize)]
struct SignalJson {
    time_s: Vec<f64>,
    egg_au: Vec<f64>,
}

/// Amplitudes read from disk, with the time column when one was present.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFile {
    pub samples: Vec<f64>,
    pub times: Option<Vec<f64>>,
}

pub fn write_signal(path: &Path, samples: &[f64], fs: f64, format: SignalFormat) -> CliResult<()> {
    let text = match format {
        SignalFormat::Csv => {
            let mut s = String::with_capacity(samples.len() * 24);
            s.push_str(SIGNAL_HEADER);
            s.push('\n');
            for (i, &x) in samples.iter().enumerate() {
                s.push_str(&fmt_num(i as f64 / fs));
                s.push(',');
                s.push_str(&fmt_num(x));
                s.push('\n');
            }
            s
        }
        SignalFormat::Json => {
            let doc = SignalJson {
                time_s: (0..samples.len()).map(|i| quantize(i as f64 / fs)).collect(),
                egg_au: samples.iter().map(|&x| quantize(x)).collect(),
            };
            let mut s = serde_json::to_string(&doc).expect("serializable");
            s.push('\n');
            s
        }
    };
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_signal(path: &Path) -> CliResult<SignalFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if text.trim_start().starts_with('{') {
        let doc: SignalJson = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: malformed JSON signal: {e}", path.display())))?;
        if doc.time_s.len() != doc.egg_au.len() {
            return Err(CliError::Usage(format!(
                "{}: time_s and egg_au differ in length",
                path.display()
            )));
        }
        return Ok(SignalFile {
            samples: doc.egg_au,
            times: Some(doc.time_s),
        });
    }
    let rows = parse_numeric_csv(path, &text)?;
    match rows.width {
        1 => Ok(SignalFile {
            samples: rows.columns.into_iter().next().unwrap(),
            times: None,
        }),
        2 => {
            let mut cols = rows.columns.into_iter();
            let times = cols.next().unwrap();
            let samples = cols.next().unwrap();
            Ok(SignalFile {
                samples,
                times: Some(times),
            })
        }
        w => Err(CliError::Usage(format!(
            "{}: expected 1 or 2 columns, found {w}",
            path.display()
        ))),
    }
}

pub fn write_psd(path: &Path, psd: &PsdModel) -> CliResult<()> {
    let mut s = String::from(PSD_HEADER);
    s.push('\n');
    for (f, m) in psd.freqs.iter().zip(&psd.mags) {
        s.push_str(&format!("{},{}\n", fmt_num(*f), fmt_num(*m)));
    }
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

/// True when the file starts with the PSD header.
pub fn is_psd_file(path: &Path) -> CliResult<bool> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .next()
        .is_some_and(|l| l.trim().eq_ignore_ascii_case(PSD_HEADER)))
}

pub fn read_psd(path: &Path) -> CliResult<PsdModel> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows = parse_numeric_csv(path, &text)?;
    if rows.width != 2 {
        return Err(CliError::Usage(format!(
            "{}: a PSD file has two columns ({PSD_HEADER})",
            path.display()
        )));
    }
    let mut cols = rows.columns.into_iter();
    let freqs = cols.next().unwrap();
    let mags = cols.next().unwrap();
    Ok(PsdModel::new(freqs, mags)?)
}

struct Columns {
    width: usize,
    columns: Vec<Vec<f64>>,
}

/// Numeric CSV with an optional header line. Errors name the row and column.
fn parse_numeric_csv(path: &Path, text: &str) -> CliResult<Columns> {
    let bad = |line: usize, msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
    let mut width = 0;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let is_header = columns.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err());
        if is_header {
            if i > 0 && width > 0 {
                return Err(bad(i + 1, "unexpected header".into()));
            }
            width = fields.len();
            columns = vec![Vec::new(); width];
            continue;
        }
        if width == 0 {
            width = fields.len();
            columns = vec![Vec::new(); width];
        }
        if fields.len() != width {
            return Err(bad(
                i + 1,
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| bad(i + 1, format!("column {}: `{f}` is not a number", c + 1)))?;
            if !v.is_finite() {
                return Err(bad(i + 1, format!("column {}: non-finite value", c + 1)));
            }
            columns[c].push(v);
        }
    }
    if columns.first().is_none_or(|c| c.is_empty()) {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    Ok(Columns { width, columns })
}

/// `dir/name.csv` → `dir/name.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    with_suffix(out, "meta.json")
}

/// `dir/name.csv` → `dir/name.<suffix>`.
pub fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "egg".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write_metadata(path: &Path, meta: &GenerationMetadata) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(meta).expect("serializable");
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

pub fn read_metadata(path: &Path) -> CliResult<GenerationMetadata> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: malformed metadata: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}
