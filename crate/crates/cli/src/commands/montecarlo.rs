use eggsynth::stats::{run_monte_carlo, Alternative, McMode, MonteCarloConfig};
use eggsynth::{GenerationConfig, KernelPriors};

use crate::error::{CliError, CliResult};
use crate::format::to_json;
use crate::{AlternativeArg, ModeArg, MonteCarloArgs};

/// Full-mode replication count above which `--force` is required.
pub const FULL_MODE_LIMIT: usize = 100_000;

pub fn run(a: &MonteCarloArgs) -> CliResult<String> {
    let mode = match a.mode {
        ModeArg::Fast => McMode::Fast,
        ModeArg::Full => McMode::Full,
    };
    if mode == McMode::Full && a.reps > FULL_MODE_LIMIT && !a.force {
        return Err(CliError::Usage(format!(
            "full mode synthesizes {} signals; above {FULL_MODE_LIMIT} replications pass --force",
            2 * a.n * a.reps
        )));
    }
    let config = MonteCarloConfig {
        n_per_group: a.n,
        replications: a.reps,
        mode,
        seed: a.seed,
        alternative: match a.alternative {
            AlternativeArg::TwoSided => Alternative::TwoSided,
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::Greater => Alternative::Greater,
        },
        signal: GenerationConfig {
            duration: a.duration,
            breathing: a.breathing.is_on(),
            ..Default::default()
        },
    };
    let priors = KernelPriors::default();
    let report = match a.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(|| run_monte_carlo(&config, &priors))?,
        None => run_monte_carlo(&config, &priors)?,
    };
    if report.is_undefined() {
        return Err(CliError::Undefined(
            "every replication was degenerate; fractions are undefined".into(),
        ));
    }
    Ok(to_json(&report))
}
