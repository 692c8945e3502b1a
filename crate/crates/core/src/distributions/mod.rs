//! Special functions, distribution laws and seeded sampling.

mod bivariate_t;
mod gamma;
mod normal;
mod random;
pub mod special;
mod student_t;

use serde::{Deserialize, Serialize};

pub use bivariate_t::{bivariate_t_logpdf, DiagonalScale};
pub use gamma::{gamma_cdf, gamma_ln_pdf, gamma_quantile, gamma_sf};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use random::{
    sample_chi_squared, sample_gamma, sample_normal, sample_truncated_normal, RandomStream,
};
pub use student_t::{
    student_t_cdf, student_t_ln_pdf, student_t_pdf, student_t_quantile, student_t_sf,
};

use crate::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("probability out of [0, 1]: {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Location-scale Student t law: `(X - center) / scale ~ t_df`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledTLaw {
    pub center: f64,
    pub scale: f64,
    pub df: f64,
}

impl ScaledTLaw {
    pub fn new(center: f64, scale: f64, df: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::domain(format!(
                "center must be finite, got {center}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "scale must be positive, got {scale}"
            )));
        }
        if !(df > 0.0 && df.is_finite()) {
            return Err(Error::domain(format!("df must be positive, got {df}")));
        }
        Ok(ScaledTLaw { center, scale, df })
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        student_t::cdf_unchecked(self.standardize(x), self.df)
    }

    pub fn sf(&self, x: f64) -> f64 {
        student_t::cdf_unchecked(-self.standardize(x), self.df)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        student_t::ln_pdf_unchecked(self.standardize(x), self.df).exp() / self.scale
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.center + self.scale * student_t_quantile(p, self.df)?)
    }

    /// Mass of `(a, b]`.
    pub fn interval_prob(&self, a: f64, b: f64) -> Result<f64> {
        scaled_t_interval_prob(self, a, b)
    }
}

/// Mass a scaled t law assigns to `(a, b]`; `a` may be `-inf`, `b` may be `+inf`.
///
/// Intervals lying entirely above the center are evaluated through the
/// survival function so far-tail bins keep their relative precision.
pub fn scaled_t_interval_prob(law: &ScaledTLaw, a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::domain(format!(
            "interval requires a <= b, got ({a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mass = if a >= law.center {
        law.sf(a) - law.sf(b)
    } else if b <= law.center {
        law.cdf(b) - law.cdf(a)
    } else {
        1.0 - law.cdf(a) - law.sf(b)
    };
    Ok(mass.clamp(0.0, 1.0))
}

/// Root of an increasing function bracketed by `lo < hi`.
///
/// `f` returns the residual and its derivative. Newton steps that leave the
/// bracket fall back to bisection, geometric when the bracket spans several
/// orders of magnitude on the positive axis.
pub(crate) fn solve_increasing(f: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64, start: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..400 {
        let (r, d) = f(x);
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - r / d;
        let next = if d > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs()
            || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs())
        {
            break;
        }
    }
    x
}
