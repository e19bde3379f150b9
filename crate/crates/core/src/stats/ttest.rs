use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

use super::student_t::t_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Mean difference below zero.
    Less,
    /// Mean difference above zero.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Mean of `x - y`.
    pub mean_diff: f64,
    /// Sample SD of `x - y` (n - 1 denominator).
    pub sd_diff: f64,
}

/// Paired-sample t-test on `x - y`.
pub fn paired_t_test(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TTestResult> {
    if x.len() != y.len() {
        return Err(invalid(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(invalid("paired t-test needs at least two pairs"));
    }
    let nf = n as f64;
    let mean = x.iter().zip(y).map(|(a, b)| a - b).sum::<f64>() / nf;
    let ss = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b - mean).powi(2))
        .sum::<f64>();
    let sd = (ss / (nf - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateTest(
            "paired differences have zero standard deviation".into(),
        ));
    }
    let t = mean / (sd / nf.sqrt());
    let dof = n - 1;
    let p = match alternative {
        Alternative::TwoSided => 2.0 * t_cdf(-t.abs(), dof as f64)?,
        Alternative::Less => t_cdf(t, dof as f64)?,
        Alternative::Greater => t_cdf(-t, dof as f64)?,
    };
    Ok(TTestResult {
        t_stat: t,
        dof,
        p_value: p.clamp(0.0, 1.0),
        mean_diff: mean,
        sd_diff: sd,
    })
}
