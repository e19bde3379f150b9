//! Butterworth band-pass design and zero-phase application.
//!
//! The analog low-pass prototype is mapped to a band-pass around the
//! prewarped edges, discretized with the bilinear transform and stored as
//! second-order sections. Every section has its zeros at z = 1 and z = -1.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result};

/// Transposed direct form II biquad, `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2)
            / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    /// State that leaves the section at rest for a constant unit input.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z1 = self.b[2] - self.a[2] * g;
        let z0 = self.b[1] - self.a[1] * g + z1;
        [z0, z1]
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    fn run(&self, x: &mut [f64], mut s: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        for v in x.iter_mut() {
            let xin = *v;
            let y = b0 * xin + s[0];
            s[0] = b1 * xin - a1 * y + s[1];
            s[1] = b2 * xin - a2 * y;
            *v = y;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    pub order: usize,
    pub fs: f64,
    pub lo: f64,
    pub hi: f64,
    /// Overall gain is folded into the first section.
    pub sections: Vec<Biquad>,
}

impl ButterworthBandpass {
    pub fn design(order: usize, lo: f64, hi: f64, fs: f64) -> Result<Self> {
        if order == 0 {
            return Err(invalid("filter order must be at least 1"));
        }
        if !(fs.is_finite() && fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        let nyq = fs / 2.0;
        if !(0.0 < lo && lo < hi && hi < nyq) {
            return Err(invalid(format!(
                "cut-offs must satisfy 0 < lo < hi < fs/2 (got {lo}, {hi}, fs/2 = {nyq})"
            )));
        }

        let fs2 = 2.0 * fs;
        let w1 = fs2 * (PI * lo / fs).tan();
        let w2 = fs2 * (PI * hi / fs).tan();
        let bw = w2 - w1;
        let w0_sq = w1 * w2;

        // Prototype poles on the left half of the unit circle.
        let n = order as f64;
        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2.0 * n);
            let p = Complex64::from_polar(1.0, theta);
            let half = p * (bw / 2.0);
            let root = (half * half - w0_sq).sqrt();
            poles.push(half + root);
            poles.push(half - root);
        }

        // Bilinear map. The `order` zeros at s = 0 land on z = 1 and the
        // `order` zeros at infinity on z = -1, one of each per section.
        let zpoles: Vec<Complex64> = poles.iter().map(|&p| (fs2 + p) / (fs2 - p)).collect();
        let mut sections: Vec<Biquad> = pair_poles(zpoles)
            .into_iter()
            .map(|(a1, a2)| Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, a1, a2],
            })
            .collect();

        // Unit gain at the (prewarped) geometric center of the band.
        let center = (w0_sq.sqrt() / fs2).atan() * fs / PI;
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * center / fs);
        let h = sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv));
        let gain = h.re.signum() / h.norm();
        for c in &mut sections[0].b {
            *c *= gain;
        }

        Ok(Self {
            order,
            fs,
            lo,
            hi,
            sections,
        })
    }

    /// Complex response of one forward pass at `f` Hz.
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Magnitude response of the forward-backward filter, `|H(f)|^2`.
    pub fn zero_phase_gain(&self, f: f64) -> f64 {
        self.response(f).norm_sqr()
    }

    /// Single causal pass starting from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y, [0.0, 0.0]);
        }
        y
    }

    /// Forward-backward filtering with odd-reflection padding and
    /// steady-state initial conditions, so constant inputs produce no
    /// start-up transient.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        if x.is_empty() {
            return Vec::new();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(x.len() - 1);
        let mut ext = Vec::with_capacity(x.len() + 2 * pad);
        let (first, last) = (x[0], x[x.len() - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[x.len() - 1 - i]));

        self.pass_from_steady_state(&mut ext);
        ext.reverse();
        self.pass_from_steady_state(&mut ext);
        ext.reverse();
        ext[pad..pad + x.len()].to_vec()
    }

    fn pass_from_steady_state(&self, x: &mut [f64]) {
        // Each section starts in the state it would have reached after an
        // infinitely long constant input equal to x[0].
        let mut level = x[0];
        for s in &self.sections {
            let zi = s.step_state();
            s.run(x, [zi[0] * level, zi[1] * level]);
            level *= s.dc_gain();
        }
    }
}

/// Groups digital poles into `(a1, a2)` denominators: conjugate pairs first,
/// then real poles two at a time.
fn pair_poles(poles: Vec<Complex64>) -> Vec<(f64, f64)> {
    let tol = 1e-12;
    let mut out = Vec::new();
    let mut reals = Vec::new();
    for p in &poles {
        if p.im > tol {
            out.push((-2.0 * p.re, p.norm_sqr()));
        } else if p.im.abs() <= tol {
            reals.push(p.re);
        }
    }
    reals.sort_by(f64::total_cmp);
    for pair in reals.chunks(2) {
        match pair {
            [r1, r2] => out.push((-(r1 + r2), r1 * r2)),
            [r] => out.push((-r, 0.0)),
            _ => unreachable!(),
        }
    }
    out
}

/// Zero-phase Butterworth band-pass of order `order`.
pub fn butterworth_bandpass(x: &[f64], fs: f64, lo: f64, hi: f64, order: usize) -> Result<Vec<f64>> {
    Ok(ButterworthBandpass::design(order, lo, hi, fs)?.filtfilt(x))
}
