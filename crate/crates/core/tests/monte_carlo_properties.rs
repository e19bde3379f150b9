use eggsynth::rng::indexed_rng;
use eggsynth::stats::{paired_t_test, run_monte_carlo, Alternative, McMode, MonteCarloConfig};
use eggsynth::{GenerationConfig, KernelPriors};
use rand_distr::{Distribution, Normal};

fn config(n: usize, reps: usize, mode: McMode) -> MonteCarloConfig {
    MonteCarloConfig {
        n_per_group: n,
        replications: reps,
        mode,
        seed: 3,
        alternative: Alternative::TwoSided,
        signal: GenerationConfig {
            breathing: false,
            ..Default::default()
        },
    }
}

/// Fraction of p < 0.05 when prior DF draws are snapped to the Welch grid
/// of the full pipeline (0.4 cpm for 300-sample segments at 2 Hz).
fn quantized_fast_fraction(priors: &KernelPriors, n: usize, reps: usize) -> (f64, usize) {
    let step = 2.0 / 300.0 * 60.0;
    let f = Normal::new(priors.mu_df_fasting.mean, priors.mu_df_fasting.sd).unwrap();
    let p = Normal::new(priors.mu_df_postprandial.mean, priors.mu_df_postprandial.sd).unwrap();
    let (mut hits, mut valid) = (0, 0);
    for r in 0..reps {
        let mut rng = indexed_rng(77, r as u64);
        let snap = |v: f64| (v / step).round() * step;
        let x: Vec<f64> = (0..n).map(|_| snap(f.sample(&mut rng))).collect();
        let y: Vec<f64> = (0..n).map(|_| snap(p.sample(&mut rng))).collect();
        if let Ok(t) = paired_t_test(&x, &y, Alternative::TwoSided) {
            valid += 1;
            hits += usize::from(t.p_value < 0.05);
        }
    }
    (hits as f64 / valid as f64, valid)
}

#[test]
fn full_mode_matches_fast_mode_up_to_grid_quantization() {
    let priors = KernelPriors::default();
    let full = run_monte_carlo(&config(20, 2000, McMode::Full), &priors).unwrap();
    let b = full.fraction(0.05).unwrap();
    let (q, nq) = quantized_fast_fraction(&priors, 20, 20_000);
    let se = (q * (1.0 - q) / nq as f64 + b * (1.0 - b) / full.valid_replications as f64).sqrt();
    assert!((q - b).abs() <= 0.05 + 1.96 * se, "quantized fast {q} vs full {b} (se {se})");

    // Snapping halves the effective effect size, so the full pipeline has
    // clearly less power than the continuous draws.
    let fast = run_monte_carlo(&config(20, 2000, McMode::Fast), &priors).unwrap();
    assert!(fast.fraction(0.05).unwrap() > b);
}

#[test]
fn more_subjects_give_more_power() {
    let priors = KernelPriors::default();
    let small = run_monte_carlo(&config(20, 50_000, McMode::Fast), &priors).unwrap();
    let large = run_monte_carlo(&config(100, 50_000, McMode::Fast), &priors).unwrap();
    for t in [0.05, 0.01, 0.001] {
        assert!(large.fraction(t).unwrap() > small.fraction(t).unwrap(), "threshold {t}");
    }
}

#[test]
fn null_p_values_are_uniform() {
    // Same distribution in both groups: the two-sided p-value is U(0, 1).
    let reps = 100_000;
    let d = Normal::new(3.0, 0.11).unwrap();
    let mut p: Vec<f64> = (0..reps)
        .map(|r| {
            let mut rng = indexed_rng(41, r as u64);
            let x: Vec<f64> = (0..20).map(|_| d.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..20).map(|_| d.sample(&mut rng)).collect();
            paired_t_test(&x, &y, Alternative::TwoSided).unwrap().p_value
        })
        .collect();
    p.sort_by(f64::total_cmp);
    let n = reps as f64;
    let ks = p
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max);
    // Kolmogorov critical value at the 1% level.
    assert!(ks < 1.628 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn null_priors_reject_at_nominal_rate() {
    let mut priors = KernelPriors::default();
    priors.mu_df_postprandial = priors.mu_df_fasting;
    let r = run_monte_carlo(&config(20, 200_000, McMode::Fast), &priors).unwrap();
    for t in [0.05, 0.01, 0.001] {
        let f = r.fraction(t).unwrap();
        let se = (t * (1.0 - t) / 200_000.0).sqrt();
        assert!((f - t).abs() < 4.0 * se, "threshold {t}: {f}");
    }
}
