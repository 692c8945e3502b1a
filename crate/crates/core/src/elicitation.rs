//! Elicitation of the conjugate normal-gamma prior from virtual-certainty
//! statements.
//!
//! The expert supplies an interval `(m1, m2)` that contains both arm means
//! with probability `gamma_vc`, together with lower and upper bounds
//! `s1_sq <= s2_sq` on the squared half-length of an interval that would
//! contain a single measurement with the same probability.

use serde::{Deserialize, Serialize};

use crate::distributions::{gamma_quantile, std_normal_quantile};
use crate::{Error, Result};

pub const DEFAULT_VIRTUAL_CERTAINTY: f64 = 0.999;

/// Initial bisection bracket for the gamma shape.
pub const SHAPE_BRACKET: (f64, f64) = (1e-3, 1e3);
/// The bracket is widened by this factor per expansion.
pub const SHAPE_EXPANSION_FACTOR: f64 = 10.0;
/// Shapes beyond these limits are reported as having no solution.
pub const SHAPE_CAP: (f64, f64) = (1e-6, 1e9);
pub const MAX_BISECTION_ITERATIONS: u32 = 200;
pub const RATIO_TOLERANCE: f64 = 1e-10;

fn default_gamma_vc() -> f64 {
    DEFAULT_VIRTUAL_CERTAINTY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElicitationSpec {
    pub m1: f64,
    pub m2: f64,
    pub s1_sq: f64,
    pub s2_sq: f64,
    #[serde(default = "default_gamma_vc")]
    pub gamma_vc: f64,
}

impl ElicitationSpec {
    pub fn new(m1: f64, m2: f64, s1_sq: f64, s2_sq: f64) -> Self {
        ElicitationSpec {
            m1,
            m2,
            s1_sq,
            s2_sq,
            gamma_vc: DEFAULT_VIRTUAL_CERTAINTY,
        }
    }

    pub fn with_virtual_certainty(mut self, gamma_vc: f64) -> Self {
        self.gamma_vc = gamma_vc;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.m1, self.m2, self.s1_sq, self.s2_sq, self.gamma_vc]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::domain("elicitation inputs must be finite"));
        }
        if self.m1 >= self.m2 {
            return Err(Error::domain(format!(
                "need m1 < m2, got m1={} m2={}",
                self.m1, self.m2
            )));
        }
        if self.s1_sq <= 0.0 {
            return Err(Error::domain(format!("need s1_sq > 0, got {}", self.s1_sq)));
        }
        if self.s1_sq == self.s2_sq {
            return Err(Error::Degenerate(format!(
                "s1_sq equals s2_sq ({}); the variance prior would be a point mass",
                self.s1_sq
            )));
        }
        if self.s1_sq > self.s2_sq {
            return Err(Error::domain(format!(
                "need s1_sq < s2_sq, got s1_sq={} s2_sq={}",
                self.s1_sq, self.s2_sq
            )));
        }
        if !(self.gamma_vc > 0.5 && self.gamma_vc < 1.0) {
            return Err(Error::domain(format!(
                "virtual certainty must lie in (0.5, 1), got {}",
                self.gamma_vc
            )));
        }
        Ok(())
    }

    /// `Φ^{-1}((1 + γ) / 2)`.
    pub fn z(&self) -> Result<f64> {
        std_normal_quantile(0.5 * (1.0 + self.gamma_vc))
    }
}

/// Hyperparameters of the prior
/// `μ_E, μ_R | σ² ~ N(mu0, tau0_sq σ²)` independently, `1/σ² ~ Gamma(alpha0, beta0)`
/// with `beta0` a rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub mu0: f64,
    pub tau0_sq: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl Hyperparameters {
    pub fn new(mu0: f64, tau0_sq: f64, alpha0: f64, beta0: f64) -> Result<Self> {
        let h = Hyperparameters {
            mu0,
            tau0_sq,
            alpha0,
            beta0,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu0.is_finite() {
            return Err(Error::domain(format!(
                "mu0 must be finite, got {}",
                self.mu0
            )));
        }
        for (name, v) in [
            ("tau0_sq", self.tau0_sq),
            ("alpha0", self.alpha0),
            ("beta0", self.beta0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `mu0 = (m1 + m2) / 2` and `tau0_sq = ((m2 - m1) / 2)² / s2_sq`.
pub fn elicit_location(spec: &ElicitationSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let half = 0.5 * (spec.m2 - spec.m1);
    Ok((0.5 * (spec.m1 + spec.m2), half * half / spec.s2_sq))
}

/// Solution of the variance-prior equations with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceElicitation {
    pub alpha0: f64,
    pub beta0: f64,
    /// Final bracket on the shape.
    pub bracket: (f64, f64),
    /// How many times the initial bracket had to be widened.
    pub bracket_expansions: u32,
    pub iterations: u32,
}

/// Quantile ratio `q(α, 1, (1+γ)/2) / q(α, 1, (1-γ)/2)`, decreasing in `α`.
///
/// A lower quantile that underflows makes the ratio infinite, which keeps
/// the monotone ordering intact for the bisection.
fn quantile_ratio(alpha: f64, gamma_vc: f64) -> Result<f64> {
    let upper = gamma_quantile(0.5 * (1.0 + gamma_vc), alpha, 1.0)?;
    match gamma_quantile(0.5 * (1.0 - gamma_vc), alpha, 1.0) {
        Ok(lower) if lower > 0.0 => Ok(upper / lower),
        Ok(_) | Err(Error::Numeric(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Solves for `(alpha0, beta0)` so that the central `gamma_vc` interval of
/// `1/σ²` is `[z²/s2_sq, z²/s1_sq]`.
pub fn elicit_variance(spec: &ElicitationSpec) -> Result<VarianceElicitation> {
    spec.validate()?;
    let target = spec.s2_sq / spec.s1_sq;
    let g = spec.gamma_vc;

    let (mut lo, mut hi) = SHAPE_BRACKET;
    let mut expansions = 0;
    while quantile_ratio(hi, g)? > target {
        if hi >= SHAPE_CAP.1 {
            return Err(Error::NoSolution(format!(
                "bound ratio s2_sq/s1_sq = {target} needs a gamma shape above the cap {:e} \
                 (bracket widened {expansions} times)",
                SHAPE_CAP.1
            )));
        }
        lo = hi;
        hi = (hi * SHAPE_EXPANSION_FACTOR).min(SHAPE_CAP.1);
        expansions += 1;
    }
    while quantile_ratio(lo, g)? < target {
        if lo <= SHAPE_CAP.0 {
            return Err(Error::NoSolution(format!(
                "bound ratio s2_sq/s1_sq = {target} needs a gamma shape below the cap {:e} \
                 (bracket widened {expansions} times)",
                SHAPE_CAP.0
            )));
        }
        hi = lo;
        lo = (lo / SHAPE_EXPANSION_FACTOR).max(SHAPE_CAP.0);
        expansions += 1;
    }

    // bisection on log(alpha)
    let mut alpha = (lo * hi).sqrt();
    let mut iterations = 0;
    while iterations < MAX_BISECTION_ITERATIONS {
        iterations += 1;
        alpha = (lo * hi).sqrt();
        let ratio = quantile_ratio(alpha, g)?;
        if (ratio / target - 1.0).abs() < RATIO_TOLERANCE {
            break;
        }
        if ratio > target {
            lo = alpha;
        } else {
            hi = alpha;
        }
        if hi / lo - 1.0 < 4.0 * f64::EPSILON {
            break;
        }
    }

    let z = spec.z()?;
    let beta0 = gamma_quantile(0.5 * (1.0 + g), alpha, 1.0)? * spec.s1_sq / (z * z);
    Ok(VarianceElicitation {
        alpha0: alpha,
        beta0,
        bracket: (lo, hi),
        bracket_expansions: expansions,
        iterations,
    })
}

/// Relative residuals of the two quantile equations at `(alpha0, beta0)`.
pub fn variance_residuals(spec: &ElicitationSpec, alpha0: f64, beta0: f64) -> Result<(f64, f64)> {
    let z = spec.z()?;
    let g = spec.gamma_vc;
    let upper_target = z * z / spec.s1_sq;
    let lower_target = z * z / spec.s2_sq;
    let upper = gamma_quantile(0.5 * (1.0 + g), alpha0, beta0)?;
    let lower = gamma_quantile(0.5 * (1.0 - g), alpha0, beta0)?;
    Ok((
        (upper / upper_target - 1.0).abs(),
        (lower / lower_target - 1.0).abs(),
    ))
}

pub fn elicit(spec: &ElicitationSpec) -> Result<Hyperparameters> {
    let (mu0, tau0_sq) = elicit_location(spec)?;
    let v = elicit_variance(spec)?;
    Hyperparameters::new(mu0, tau0_sq, v.alpha0, v.beta0)
}
