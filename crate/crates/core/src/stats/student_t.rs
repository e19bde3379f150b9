use crate::error::{invalid, Result};

use super::special::reg_inc_beta;

/// Lower-tail Student-t CDF, `P(T <= t)` with `dof` degrees of freedom.
pub fn t_cdf(t: f64, dof: f64) -> Result<f64> {
    if !(dof >= 1.0) || !dof.is_finite() {
        return Err(invalid("degrees of freedom must be at least 1"));
    }
    if t.is_nan() {
        return Err(invalid("t is NaN"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    // P(|T| > |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
    let t2 = t * t;
    let x = dof / (dof + t2);
    let y = t2 / (dof + t2);
    let tail = 0.5 * reg_inc_beta(0.5 * dof, 0.5, x, y);
    Ok(if t < 0.0 { tail } else { 1.0 - tail })
}

/// Upper-tail probability `P(T > t)`, without cancellation for large `t`.
pub fn t_sf(t: f64, dof: f64) -> Result<f64> {
    t_cdf(-t, dof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_point() {
        assert_eq!(t_cdf(0.0, 7.0).unwrap(), 0.5);
    }

    #[test]
    fn cauchy_closed_form() {
        for t in [-3.0f64, -1.0, 0.25, 1.0, 5.0] {
            let exact = 0.5 + t.atan() / std::f64::consts::PI;
            assert!((t_cdf(t, 1.0).unwrap() - exact).abs() < 1e-13, "t={t}");
        }
        assert!((t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_dof_closed_form() {
        // F(t) = 1/2 + t / (2 sqrt(2 + t^2))
        for t in [-4.0f64, -0.5, 0.7, 2.0, 8.0] {
            let exact = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((t_cdf(t, 2.0).unwrap() - exact).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn table_quantile() {
        assert!((t_cdf(1.7247, 20.0).unwrap() - 0.95).abs() < 1e-4);
    }

    #[test]
    fn complements_sum_to_one() {
        for dof in [1.0, 3.0, 19.0, 99.0, 1000.0] {
            for t in [-7.5, -2.0, -0.1, 0.3, 1.9, 6.0] {
                let s = t_cdf(t, dof).unwrap() + t_cdf(-t, dof).unwrap();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_dof() {
        assert!(t_cdf(1.0, 0.5).is_err());
        assert!(t_cdf(1.0, f64::NAN).is_err());
    }
}
