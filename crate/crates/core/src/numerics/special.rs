//! Special functions: log-gamma, regularized incomplete beta and gamma
//! functions, and the standard normal CDF and quantile.
//!
//! Thin wrappers over `statrs` that validate arguments and report domain
//! errors instead of panicking.

use std::f64::consts::SQRT_2;

use statrs::function::{beta, erf, gamma};

use crate::error::{Error, Result};

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "incomplete beta needs a, b > 0 (got a={a}, b={b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "incomplete beta argument {x} outside [0, 1]"
        )));
    }
    beta::checked_beta_reg(a, b, x)
        .map(|v| v.clamp(0.0, 1.0))
        .map_err(|e| Error::Domain(e.to_string()))
}

/// Mean of Beta(a, b).
pub fn beta_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!(
            "beta mean needs a, b > 0 (got a={a}, b={b})"
        )));
    }
    Ok(a / (a + b))
}

/// CDF of Beta(a, b) at `x`, clamping `x` into `[0, 1]`.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> Result<f64> {
    reg_inc_beta(a, b, x.clamp(0.0, 1.0))
}

/// `P(Beta(a, b) >= x)`, computed without cancellation in the upper tail.
pub fn beta_tail(a: f64, b: f64, x: f64) -> Result<f64> {
    // 1 − I_x(a, b) = I_{1−x}(b, a).
    reg_inc_beta(b, a, 1.0 - x.clamp(0.0, 1.0))
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() || x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!(
            "incomplete gamma needs a > 0 and x >= 0 (got a={a}, x={x})"
        )));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    gamma::checked_gamma_lr(a, x).map_err(|e| Error::Domain(e.to_string()))
}

/// CDF of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_cdf(dof: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if dof == 2 {
        return -(-x / 2.0).exp_m1();
    }
    reg_lower_gamma(dof as f64 / 2.0, x / 2.0).expect("valid chi-square arguments")
}

/// Standard normal CDF Φ, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / SQRT_2)
}

/// Standard normal quantile: the `x` with `Φ(x) = gamma`.
pub fn normal_quantile(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs 0 < gamma < 1 (got {gamma})"
        )));
    }
    Ok(-SQRT_2 * erf::erfc_inv(2.0 * gamma))
}
