//! Paired t-test, Student-t distribution and the Monte Carlo validation harness.

mod montecarlo;
mod special;
mod student_t;
mod ttest;

pub use montecarlo::{run_monte_carlo, McMode, MonteCarloConfig, MonteCarloReport, THRESHOLDS};
pub use special::{ln_beta, ln_gamma, reg_inc_beta};
pub use student_t::{t_cdf, t_sf};
pub use ttest::{paired_t_test, Alternative, TTestResult};
