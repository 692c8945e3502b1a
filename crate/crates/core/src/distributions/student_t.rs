use std::f64::consts::PI;

use super::normal::std_normal_quantile;
use super::solve_increasing;
use super::special::{beta_inc, ln_gamma};
use crate::{Error, Result};

fn check_df(df: f64) -> Result<()> {
    if df > 0.0 && df.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Student t degrees of freedom must be positive, got {df}"
        )))
    }
}

/// `P(T <= x)` for a central Student t with `df` degrees of freedom.
pub fn student_t_cdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    Ok(cdf_unchecked(x, df))
}

/// `P(T > x)`.
pub fn student_t_sf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    Ok(cdf_unchecked(-x, df))
}

pub(crate) fn cdf_unchecked(x: f64, df: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let t2 = x * x;
    let denom = df + t2;
    // one-sided tail mass P(T > |x|)
    let tail = if df < t2 {
        0.5 * beta_inc(0.5 * df, 0.5, df / denom)
    } else {
        0.5 * (1.0 - beta_inc(0.5, 0.5 * df, t2 / denom))
    };
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn student_t_ln_pdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    Ok(ln_pdf_unchecked(x, df))
}

pub(crate) fn ln_pdf_unchecked(x: f64, df: f64) -> f64 {
    ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * PI).ln()
        - 0.5 * (df + 1.0) * (x * x / df).ln_1p()
}

pub fn student_t_pdf(x: f64, df: f64) -> Result<f64> {
    Ok(student_t_ln_pdf(x, df)?.exp())
}

/// Inverse of [`student_t_cdf`].
pub fn student_t_quantile(p: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "t quantile requires 0 < p < 1, got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p, df));
    }
    Ok(lower_quantile(p, df))
}

fn lower_quantile(p: f64, df: f64) -> f64 {
    // bracket [lo, 0] with lo far enough into the tail
    let mut lo = std_normal_quantile(p).unwrap_or(-40.0).min(-1.0);
    while cdf_unchecked(lo, df) > p {
        lo *= 2.0;
        if !lo.is_finite() {
            return f64::NEG_INFINITY;
        }
    }
    let start = 0.5 * lo;
    solve_increasing(
        |x| (cdf_unchecked(x, df) - p, ln_pdf_unchecked(x, df).exp()),
        lo,
        0.0,
        start,
    )
}
