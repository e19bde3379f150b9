//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p eggsynth-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use eggsynth::analysis::ButterworthBandpass;
use eggsynth::model::{add_colored_noise, build_arrhythmia_psd, build_psd, FrequencyGrid};
use eggsynth::rng::{indexed_rng, stream_rng, Stream};
use eggsynth::stats::{run_monte_carlo, t_cdf, McMode, MonteCarloConfig};
use eggsynth::synthesis::Window;
use eggsynth::{
    generate_egg, generate_egg_vr, GenerationConfig, KernelDraw, KernelPriors, PsdModel, State,
};
use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal, StudentsT};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_eggsynth")
}

fn run_json(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Value {
    let out = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .envs(env.iter().copied())
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

// 1 -------------------------------------------------------------------------

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut slowest = Duration::ZERO;
    for k in 1..=10u64 {
        let seed = k.to_string();
        let mut files = Vec::new();
        for (tag, threads) in [("a", "1"), ("b", "1"), ("c", "8")] {
            let out = format!("{tag}{k}.csv");
            let t0 = Instant::now();
            run_json(
                d,
                &["generate", "--seed", &seed, "--out", &out],
                &[("RAYON_NUM_THREADS", threads)],
            );
            slowest = slowest.max(t0.elapsed());
            files.push((
                fs::read(d.join(&out)).unwrap(),
                fs::read(d.join(format!("{tag}{k}.meta.json"))).unwrap(),
            ));
        }
        if files[0] != files[1] || files[0] != files[2] {
            return outcome(false, format!("seed {k}: outputs differ"));
        }
    }
    outcome(
        slowest < Duration::from_secs(1),
        format!("seeds 1..10 byte-identical across runs and thread counts; slowest run {slowest:.2?} (limit 1 s)"),
    )
}

// 2 -------------------------------------------------------------------------

/// (1/N) * sum over the full two-sided spectrum of |X|^2, with |X_m|^2 = S_m.
fn parseval_oracle(psd: &PsdModel, n: usize) -> f64 {
    let mut two_sided = 0.0;
    for m in 0..n {
        let k = if m <= n / 2 { m } else { n - m };
        two_sided += psd.mags[k];
    }
    two_sided / n as f64
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn parseval() -> Outcome {
    let priors = KernelPriors::default();
    let mut rng = indexed_rng(2024, 0);
    let mut worst: f64 = 0.0;
    let mut segments = 0;
    for _ in 0..100 {
        let fs = [1.0, 2.0, 4.0, 5.0][rng.random_range(0..4)];
        let duration = rng.random_range(120..1800) as f64;
        let state = if rng.random() { State::Fasting } else { State::Postprandial };
        let base = GenerationConfig {
            duration,
            fs,
            state,
            breathing: rng.random(),
            seed: Some(rng.random()),
            ..Default::default()
        };
        let seed = base.seed.unwrap();

        // Regular rhythm over the full length.
        let out = generate_egg(&base, &priors).unwrap();
        let n = out.signal.samples.len();
        worst = worst.max(rel(energy(&out.signal.samples), parseval_oracle(&out.psd, n)));
        segments += 1;

        // Arrhythmia and sickness episodes, each checked against its own spectrum.
        let a0 = (rng.random_range(0.05..0.3) * duration).round();
        let a1 = (rng.random_range(0.35..0.5) * duration).round();
        let s0 = (rng.random_range(0.55..0.7) * duration).round();
        let cfg = GenerationConfig {
            arrhythmia: Some(Window::new(a0, a1)),
            sickness: Some(Window::new(s0, duration)),
            ..base.clone()
        };
        let vr = generate_egg_vr(&cfg, &priors).unwrap();
        let x = &vr.signal.samples;
        let sr = Window::new(s0, duration).sample_range(fs);
        worst = worst.max(rel(energy(&x[sr.clone()]), parseval_oracle(&vr.sickness_psd, sr.len())));

        let ar = Window::new(a0, a1).sample_range(fs);
        let draw = vr.signal.metadata.draw;
        let grid = FrequencyGrid::new(ar.len(), fs).unwrap();
        let apsd =
            build_arrhythmia_psd(&draw, &grid, 0.0, &mut stream_rng(seed, Stream::ArrhythmiaNoise))
                .unwrap();
        worst = worst.max(rel(energy(&x[ar.clone()]), parseval_oracle(&apsd, ar.len())));
        segments += 2;
    }
    outcome(
        worst <= 1e-9,
        format!("{segments} segments from 100 configurations; worst relative energy error {worst:.2e} (limit 1e-9)"),
    )
}

// 3 -------------------------------------------------------------------------

fn df_calibration() -> Outcome {
    let priors = KernelPriors::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for (state, target) in [(State::Fasting, 2.9336), (State::Postprandial, 2.9743)] {
        let sum: f64 = (1..=10_000u64)
            .into_par_iter()
            .map(|seed| {
                let cfg = GenerationConfig {
                    state,
                    breathing: false,
                    seed: Some(seed),
                    ..Default::default()
                };
                generate_egg(&cfg, &priors).unwrap().features.unwrap().df_hz * 60.0
            })
            .sum();
        let mean = sum / 10_000.0;
        pass &= (mean - target).abs() <= 0.06;
        parts.push(format!("{state} mean DF {mean:.4} cpm vs {target} (±0.06)"));
    }
    outcome(pass, parts.join("; "))
}

// 4 -------------------------------------------------------------------------

/// P(|T| > c) for T ~ noncentral t(dof, ncp), by integrating the normal tail
/// over the chi-square distribution of the variance estimate.
fn noncentral_t_two_sided(c: f64, dof: f64, ncp: f64) -> f64 {
    let z = Normal::new(0.0, 1.0).unwrap();
    let chi = ChiSquared::new(dof).unwrap();
    let upper = dof + 40.0 * (2.0 * dof).sqrt() + 40.0;
    let steps = 40_000;
    let h = upper / steps as f64;
    let f = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let s = (v / dof).sqrt();
        let tail = z.sf(c * s - ncp) + z.cdf(-c * s - ncp);
        tail * chi.pdf(v)
    };
    // Composite Simpson.
    let mut acc = f(0.0) + f(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Two-sided critical value of Student's t by bisection on the statrs CDF.
fn t_critical(alpha: f64, dof: f64) -> f64 {
    let t = StudentsT::new(0.0, 1.0, dof).unwrap();
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t.sf(mid) > alpha / 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn monte_carlo() -> Outcome {
    let priors = KernelPriors::default();
    let (mf, mp) = (priors.mu_df_fasting, priors.mu_df_postprandial);
    let effect = (mf.mean - mp.mean).abs() / (mf.sd * mf.sd + mp.sd * mp.sd).sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut previous: Option<[f64; 3]> = None;
    for n in [20usize, 100] {
        let cfg = MonteCarloConfig {
            n_per_group: n,
            replications: 1_000_000,
            mode: McMode::Fast,
            seed: 7,
            ..Default::default()
        };
        let report = run_monte_carlo(&cfg, &priors).unwrap();
        let fr = [0.05, 0.01, 0.001].map(|a| report.fraction(a).unwrap());
        pass &= fr[0] > fr[1] && fr[1] > fr[2];
        if let Some(p) = previous {
            pass &= (0..3).all(|i| fr[i] > p[i]);
        }
        previous = Some(fr);
        let dof = (n - 1) as f64;
        let ncp = effect * (n as f64).sqrt();
        let mut cells = Vec::new();
        for (i, alpha) in [0.05, 0.01, 0.001].into_iter().enumerate() {
            let power = noncentral_t_two_sided(t_critical(alpha, dof), dof, ncp);
            let diff_pp = 100.0 * (fr[i] - power);
            pass &= diff_pp.abs() <= 0.5;
            cells.push(format!(
                "p<{alpha}: {:.2}% vs {:.2}%",
                100.0 * fr[i],
                100.0 * power
            ));
        }
        parts.push(format!("n={n} [{}]", cells.join(", ")));
    }
    outcome(
        pass,
        format!(
            "fast mode 1e6 reps vs noncentral-t oracle (±0.5 pp), nested and increasing in n: {}",
            parts.join("; ")
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn sickness_trends() -> Outcome {
    let priors = KernelPriors::default();
    let counts = (1..=100u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = GenerationConfig {
                state: State::Postprandial,
                seed: Some(seed),
                ..Default::default()
            };
            let vr = generate_egg_vr(&cfg, &priors).unwrap();
            let (b, d) = (vr.before.unwrap(), vr.during.unwrap());
            [
                d.total_power > b.total_power,
                d.pct_normo < b.pct_normo,
                d.pct_tachy > b.pct_tachy,
                d.median_freq_hz > b.median_freq_hz,
                d.crest_factor < b.crest_factor,
            ]
            .map(usize::from)
        })
        .reduce(|| [0; 5], |a, b| std::array::from_fn(|i| a[i] + b[i]));
    let names = [
        "total power up",
        "normo% down",
        "tachy% up",
        "median freq up",
        "crest factor down",
    ];
    let detail = names
        .iter()
        .zip(counts)
        .map(|(n, c)| format!("{n} {c}/100"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(counts.iter().all(|&c| c >= 95), format!("{detail} (need >= 95 each)"))
}

// 6 -------------------------------------------------------------------------

const T_POINTS: [f64; 13] = [-8.0, -6.0, -4.0, -2.5, -1.0, -0.5, 0.0, 0.3, 1.0, 2.0, 3.5, 5.0, 8.0];

/// Student-t CDF at `T_POINTS`, evaluated with 40-digit arithmetic.
#[allow(clippy::excessive_precision)]
const T_REFERENCE: [(f64, [f64; 13]); 6] = [
    (1.0, [0.039583424160565542011, 0.052568456711253429951, 0.077979130377369325461, 0.12111894159084339872, 0.25, 0.35241638234956672582, 0.5, 0.59277357907774234032, 0.75, 0.85241638234956672582, 0.91141446721709525112, 0.93716704181099881619, 0.96041657583943445799]),
    (2.0, [0.007634036082669069063, 0.013335736607712385507, 0.028595479208968317066, 0.064805860110755404557, 0.21132486540518711775, 0.33333333333333333333, 0.5, 0.60375716957991119468, 0.78867513459481288225, 0.90824829046386301637, 0.96358632497276533229, 0.98112522432468813709, 0.99236596391733093094]),
    (5.0, [0.00024645333028622204224, 0.00092306914479700721301, 0.0051617077404157269022, 0.027245049671188120558, 0.1816087338245613128, 0.31914943582046450335, 0.5, 0.61187547886836276669, 0.8183912661754386872, 0.94903026058507082188, 0.99135778410735332267, 0.99794764200997333879, 0.99975354666971377796]),
    (20.0, [5.8283141357442612754e-8, 3.6218499652082854007e-6, 0.00035176164656415914474, 0.010616772719566198453, 0.16462828858585453213, 0.31126592114051179867, 0.5, 0.61636349837811987227, 0.83537171141414546787, 0.97036723227671476352, 0.99887243842347141611, 0.99996563485710228901, 0.99999994171685864256]),
    (100.0, [1.1364324038640403237e-12, 1.5862457514014282898e-8, 0.000060761822150380838601, 0.0070228945620385887038, 0.1598620778920616802, 0.30908678291544328599, 0.5, 0.61760005984984825608, 0.8401379221079383198, 0.9758939106344331602, 0.99965178614132186554, 0.9999987749132932481, 0.9999999999988635676]),
    (1000.0, [1.7133307411957371987e-15, 1.3776845866887345563e-9, 0.000034004959604390788799, 0.0062892839005453984049, 0.15877620904233615354, 0.30859254041693740732, 0.5, 0.61788024791637797779, 0.84122379095766384646, 0.97711482675337417998, 0.99975711282701608388, 0.99999966163718176757, 0.99999999999999828667]),
];

fn t_distribution() -> Outcome {
    let mut worst: f64 = 0.0;
    for (dof, values) in T_REFERENCE {
        for (t, want) in T_POINTS.iter().zip(values) {
            worst = worst.max((t_cdf(*t, dof).unwrap() - want).abs());
        }
    }
    let cauchy = (t_cdf(1.0, 1.0).unwrap() - 0.75).abs();
    outcome(
        worst <= 1e-10 && cauchy <= 1e-12,
        format!("max abs error {worst:.1e} over 78 points (limit 1e-10); |t_cdf(1,1) - 0.75| = {cauchy:.1e} (limit 1e-12)"),
    )
}

// 7 -------------------------------------------------------------------------

fn fit_round_trip() -> Outcome {
    // 40 min recordings without breathing, 1200-sample Welch segments
    // (0.1 cpm bins) and a fit band wide enough to hold the whole kernel.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let window = 1200usize;
    let bin_cpm = 2.0 / window as f64 * 60.0;
    let results: Vec<(bool, bool, f64)> = (1..=100u64)
        .into_par_iter()
        .map(|seed| {
            let out = format!("fit{seed}.csv");
            let s = seed.to_string();
            run_json(
                d,
                &["generate", "--seed", &s, "--duration", "2400", "--breathing", "off", "--out", &out],
                &[],
            );
            let meta: Value =
                serde_json::from_slice(&fs::read(d.join(format!("fit{seed}.meta.json"))).unwrap())
                    .unwrap();
            let draw: KernelDraw = serde_json::from_value(meta["draw"].clone()).unwrap();
            let w = window.to_string();
            let fit = run_json(
                d,
                &["fit", &out, "--filter", "off", "--window", &w, "--band", "0.5,6"],
                &[],
            );
            let mu = fit["mu_cpm"].as_f64().unwrap();
            let sigma = fit["sigma_cpm"].as_f64().unwrap();
            let sig_err = (sigma - draw.sigma_df).abs() / draw.sigma_df;
            ((mu - draw.mu_df).abs() <= bin_cpm, sig_err <= 0.10, sig_err)
        })
        .collect();
    let mu_ok = results.iter().filter(|r| r.0).count();
    let sig_ok = results.iter().filter(|r| r.1).count();
    let worst = results.iter().map(|r| r.2).fold(0.0, f64::max);
    outcome(
        mu_ok == 100 && sig_ok == 100,
        format!("mu within one bin ({bin_cpm} cpm) {mu_ok}/100; sigma within 10% {sig_ok}/100, worst {:.1}%", 100.0 * worst),
    )
}

// 8 -------------------------------------------------------------------------

fn filter_correctness() -> Outcome {
    let fs = 2.0;
    let f = ButterworthBandpass::design(3, 0.03, 0.6, fs).unwrap();
    // Every section has a zero at z = 1, so both numbers may be exactly zero.
    let dc_power = f.zero_phase_gain(0.0);
    let y = f.filtfilt(&vec![1.0; 8000]);
    let dc_out = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let db = |power: f64| {
        if power == 0.0 {
            "-inf dB".to_string()
        } else {
            format!("{:.0} dB", 10.0 * power.log10())
        }
    };

    let n = 40_000usize;
    let probes = [0.02, 0.03, 0.05, 0.1, 0.2, 0.35, 0.5, 0.6, 0.7, 0.85];
    let mut worst: f64 = 0.0;
    for p in probes {
        let k = (p * n as f64 / fs).round();
        let freq = k * fs / n as f64;
        let x: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * freq * t as f64 / fs).cos())
            .collect();
        let y = f.filtfilt(&x);
        let amp = |v: &[f64]| {
            let (mut c, mut s) = (0.0, 0.0);
            for (t, &vt) in v.iter().enumerate().take(3 * n / 4).skip(n / 4) {
                let ph = 2.0 * std::f64::consts::PI * freq * t as f64 / fs;
                c += vt * ph.cos();
                s += vt * ph.sin();
            }
            (c * c + s * s).sqrt()
        };
        let gain = amp(&y) / amp(&x);
        let want = f.zero_phase_gain(freq);
        worst = worst.max((gain - want).abs() / want);
    }
    outcome(
        dc_power < 1e-6 && dc_out * dc_out < 1e-6 && worst <= 0.02,
        format!(
            "DC gain {} analytic, {} measured (limit -60 dB); worst probe deviation from |H|^2 {:.2e} (limit 2%)",
            db(dc_power),
            db(dc_out * dc_out),
            worst
        ),
    )
}

// 9 -------------------------------------------------------------------------

/// Uniform floor, odd median window over 1% of the bins (at least 3), edges
/// replicated, DC kept at zero — written out longhand.
fn brute_force_noise(psd: &PsdModel, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = indexed_rng(seed, 3);
    let len = psd.mags.len();
    let mut peak = psd.mags[0];
    for &m in &psd.mags {
        if m > peak {
            peak = m;
        }
    }
    let upper = scale * peak;
    let mut raw = Vec::new();
    for _ in 0..len {
        let u: f64 = rng.random();
        raw.push(u * upper);
    }
    let mut w = (len as f64 / 100.0).round() as usize;
    if w.is_multiple_of(2) {
        w += 1;
    }
    if w < 3 {
        w = 3;
    }
    let half = w / 2;
    let mut padded = vec![raw[0]; half];
    padded.extend_from_slice(&raw);
    padded.extend(std::iter::repeat_n(raw[len - 1], half));
    let mut out = psd.mags.clone();
    for i in 0..len {
        let mut win = padded[i..i + w].to_vec();
        win.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out[i] += win[half];
    }
    if psd.freqs[0] == 0.0 {
        out[0] = 0.0;
    }
    out
}

fn colored_noise() -> Outcome {
    let priors = KernelPriors::default();
    let mut rng = indexed_rng(99, 0);
    let mut matches = 0;
    for case in 0..20u64 {
        let n_samples = rng.random_range(32..12_000);
        let scale = rng.random_range(0.001..1.0);
        let grid = FrequencyGrid::new(n_samples, 2.0).unwrap();
        let draw = KernelDraw::mean(&priors, State::Fasting, case % 2 == 0);
        let psd = build_psd(&draw, &grid).unwrap();
        let got = add_colored_noise(psd.clone(), scale, &mut indexed_rng(case, 3)).unwrap();
        let want = brute_force_noise(&psd, scale, case);
        if got.mags.len() == want.len()
            && got.mags.iter().zip(&want).all(|(a, b)| a.to_bits() == b.to_bits())
        {
            matches += 1;
        }
    }
    outcome(matches == 20, format!("{matches}/20 (scale, length) pairs bit-identical"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("determinism", determinism),
        ("Parseval", parseval),
        ("DF calibration", df_calibration),
        ("Monte Carlo structure", monte_carlo),
        ("sickness trends", sickness_trends),
        ("t-distribution accuracy", t_distribution),
        ("round-trip fitting", fit_round_trip),
        ("filter correctness", filter_correctness),
        ("colored-noise oracle", colored_noise),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {name}: {verdict} — {} [{:.1?}]",
            i + 1,
            o.detail,
            t0.elapsed()
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
