//! Gamma law in the (shape, rate) parameterization.

use super::solve_increasing;
use super::special::{gamma_p, gamma_q, ln_gamma};
use crate::{Error, Result};

fn check_params(shape: f64, rate: f64) -> Result<()> {
    if shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "gamma requires positive shape and rate, got shape={shape} rate={rate}"
        )))
    }
}

/// `G(shape, rate, x)`; satisfies `gamma_cdf(x, a, r) == gamma_cdf(r * x, a, 1)`.
pub fn gamma_cdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_params(shape, rate)?;
    Ok(gamma_p(shape, rate * x))
}

pub fn gamma_sf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_params(shape, rate)?;
    Ok(gamma_q(shape, rate * x))
}

pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_params(shape, rate)?;
    if x <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape))
}

/// Inverse of [`gamma_cdf`].
///
/// Returns a numeric error when the quantile underflows the smallest
/// positive double, which happens for very small shapes and small `p`.
pub fn gamma_quantile(p: f64, shape: f64, rate: f64) -> Result<f64> {
    check_params(shape, rate)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "gamma quantile requires 0 < p < 1, got {p}"
        )));
    }
    Ok(standard_quantile(p, shape)? / rate)
}

/// Quantile of Gamma(shape, 1).
fn standard_quantile(p: f64, shape: f64) -> Result<f64> {
    if gamma_p(shape, f64::MIN_POSITIVE) >= p {
        return Err(Error::Numeric(format!(
            "gamma quantile underflows for p={p}, shape={shape}"
        )));
    }
    let upper = p > 0.5;
    // residual oriented so it increases with x
    let residual = |x: f64| {
        if upper {
            (1.0 - p) - gamma_q(shape, x)
        } else {
            gamma_p(shape, x) - p
        }
    };
    let density = |x: f64| (-x + (shape - 1.0) * x.ln() - ln_gamma(shape)).exp();

    let mut hi = shape.max(1.0);
    while residual(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric(format!(
                "gamma quantile overflows for p={p}, shape={shape}"
            )));
        }
    }
    let mut lo = hi;
    while lo > f64::MIN_POSITIVE && residual(lo) > 0.0 {
        lo *= 1e-3;
    }
    let lo = lo.max(f64::MIN_POSITIVE);
    let start = (lo * hi).sqrt();
    Ok(solve_increasing(
        |x| (residual(x), density(x)),
        lo,
        hi,
        start,
    ))
}
