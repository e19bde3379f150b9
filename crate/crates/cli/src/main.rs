//! `eggsynth` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod format;
mod svg;

use format::SignalFormat;

#[derive(Parser)]
#[command(name = "eggsynth", version, about = "Synthetic electrogastrogram generator and analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fasting or postprandial recording.
    Generate(GenerateArgs),
    /// Generate a recording with a simulator-sickness episode.
    GenerateVr(GenerateVrArgs),
    /// Rebuild a signal from its metadata sidecar.
    Regenerate(RegenerateArgs),
    /// Extract spectral features from a recording.
    Analyze(AnalyzeArgs),
    /// Fit a Gaussian to the gastric peak of a signal or PSD.
    Fit(FitArgs),
    /// Paired t-test power simulation between fasting and postprandial DFs.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

impl OnOff {
    pub fn is_on(self) -> bool {
        self == OnOff::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Fasting,
    Postprandial,
}

impl From<StateArg> for eggsynth::State {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Fasting => eggsynth::State::Fasting,
            StateArg::Postprandial => eggsynth::State::Postprandial,
        }
    }
}

/// Parses `a,b`.
fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{}` is not a number", t.trim()))
    };
    Ok((num(a)?, num(b)?))
}

#[derive(Args, Debug, Clone)]
pub struct SignalArgs {
    /// Recording length in seconds.
    #[arg(long, default_value_t = 1200.0)]
    pub duration: f64,
    /// Sampling rate in Hz.
    #[arg(long, default_value_t = 2.0)]
    pub fs: f64,
    #[arg(long, value_enum, default_value_t = StateArg::Fasting)]
    pub state: StateArg,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub breathing: OnOff,
    /// Master seed; drawn from OS entropy when absent and recorded in the sidecar.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Arrhythmia episode `start,end` in seconds.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub arrhythmia: Option<(f64, f64)>,
    /// Colored-noise scale as a fraction of the spectral peak.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub noise: f64,
    /// Output signal path; the metadata goes to `<stem>.meta.json`.
    #[arg(long, default_value = "egg.csv")]
    pub out: PathBuf,
    /// Also write `<stem>.signal.svg` and `<stem>.psd.svg`.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, value_enum, default_value_t = SignalFormat::Csv)]
    pub format: SignalFormat,
}

#[derive(Args, Debug, Clone)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GenerateVrArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    /// Sickness onset in seconds.
    #[arg(long, default_value_t = 600.0, allow_hyphen_values = true)]
    pub onset: f64,
    /// Sickness offset in seconds.
    #[arg(long, default_value_t = 1200.0, allow_hyphen_values = true)]
    pub offset: f64,
}

#[derive(Args, Debug, Clone)]
pub struct RegenerateArgs {
    /// Metadata sidecar written by `generate` or `generate-vr`.
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long, default_value = "egg.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SignalFormat::Csv)]
    pub format: SignalFormat,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Signal file: `time_s,egg_au` CSV, single-column CSV, or JSON signal.
    pub input: PathBuf,
    /// Sampling rate in Hz; otherwise taken from the sidecar or the time column.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Apply the 0.03-0.6 Hz order-3 Butterworth band-pass before Welch.
    #[arg(long)]
    pub filter: bool,
    /// Welch segment length in samples (default: 12.5% of the signal).
    #[arg(long)]
    pub window: Option<usize>,
    /// Also write the Welch PSD as a `freq_hz,psd` CSV.
    #[arg(long)]
    pub psd_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Signal file, or PSD CSV with a `freq_hz,psd` header.
    pub input: PathBuf,
    /// Fit band `lo,hi` in cpm.
    #[arg(long, value_parser = parse_pair, default_value = "2,4", allow_hyphen_values = true)]
    pub band: (f64, f64),
    /// Welch segment length in samples for signal input.
    #[arg(long)]
    pub window: Option<usize>,
    /// Band-pass the signal before Welch.
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub filter: OnOff,
    #[arg(long)]
    pub fs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    TwoSided,
    Less,
    Greater,
}

#[derive(Args, Debug, Clone)]
pub struct MonteCarloArgs {
    /// Subjects per group.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Allow full mode above 100000 replications.
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_enum, default_value_t = AlternativeArg::TwoSided)]
    pub alternative: AlternativeArg,
    /// Breathing component of full-mode signals.
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    pub breathing: OnOff,
    /// Full-mode signal length in seconds.
    #[arg(long, default_value_t = 1200.0)]
    pub duration: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate::run(&a),
        Command::GenerateVr(a) => commands::generate::run_vr(&a),
        Command::Regenerate(a) => commands::generate::run_regenerate(&a),
        Command::Analyze(a) => commands::analyze::run(&a),
        Command::Fit(a) => commands::fit::run(&a),
        Command::Montecarlo(a) => commands::montecarlo::run(&a),
    };
    match result {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
