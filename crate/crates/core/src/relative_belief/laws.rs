use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{sample_gamma, sample_normal, RandomStream, ScaledTLaw};
use crate::elicitation::Hyperparameters;
use crate::trial_data::SufficientStats;
use crate::{Error, Result};

/// How the marginal laws of `μ_E - μ_R` are constructed.
///
/// `PaperLiteral` uses the closed forms exactly as they are usually quoted
/// for this model: prior scale `τ₀√(β₀/α₀)` and posterior degrees of freedom
/// `n_E + n_R + 2α₀ - 4`. `Derived` follows the prior itself: the difference
/// of two independent `N(μ₀, τ₀²σ²)` means has variance `2τ₀²σ²`, and the
/// posterior is the normal-gamma mixture of the conditional posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawMode {
    #[default]
    PaperLiteral,
    Derived,
}

impl fmt::Display for LawMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawMode::PaperLiteral => "paper_literal",
            LawMode::Derived => "derived",
        })
    }
}

impl FromStr for LawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_literal" | "paper-literal" => Ok(LawMode::PaperLiteral),
            "derived" => Ok(LawMode::Derived),
            other => Err(Error::Parse(format!(
                "unknown mode `{other}` (expected paper_literal or derived)"
            ))),
        }
    }
}

/// Marginal prior law of `μ_E - μ_R`: centered at 0 with `2α₀` degrees of freedom.
pub fn prior_difference_law(hyper: &Hyperparameters, mode: LawMode) -> Result<ScaledTLaw> {
    hyper.validate()?;
    let factor = match mode {
        LawMode::PaperLiteral => 1.0,
        LawMode::Derived => 2.0,
    };
    ScaledTLaw::new(
        0.0,
        (factor * hyper.tau0_sq * hyper.beta0 / hyper.alpha0).sqrt(),
        2.0 * hyper.alpha0,
    )
}

/// Shape and rate of the posterior gamma law of `1/σ²`.
fn posterior_precision(hyper: &Hyperparameters, stats: &SufficientStats) -> (f64, f64) {
    let n = (stats.n_e + stats.n_r) as f64;
    let shape = 0.5 * (n + 2.0 * hyper.alpha0);
    let rate = 0.5 * (2.0 * hyper.beta0 + (n - 2.0) * stats.s2);
    (shape, rate)
}

/// Conditional posterior mean and precision multiplier `n + 1/τ₀²` of one arm mean.
fn arm_posterior(hyper: &Hyperparameters, xbar: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let prec = n + 1.0 / hyper.tau0_sq;
    ((n * xbar + hyper.mu0 / hyper.tau0_sq) / prec, prec)
}

/// Marginal posterior law of `μ_E - μ_R`.
pub fn posterior_difference_law(
    hyper: &Hyperparameters,
    stats: &SufficientStats,
    mode: LawMode,
) -> Result<ScaledTLaw> {
    hyper.validate()?;
    if !(stats.s2 >= 0.0 && stats.s2.is_finite()) {
        return Err(Error::domain(format!(
            "pooled variance must be >= 0, got {}",
            stats.s2
        )));
    }
    let n_e = stats.n_e as f64;
    let n_r = stats.n_r as f64;
    let n = n_e + n_r;
    match mode {
        LawMode::PaperLiteral => {
            let df = n + 2.0 * hyper.alpha0 - 4.0;
            if df <= 0.0 {
                return Err(Error::domain(format!(
                    "posterior degrees of freedom n_E + n_R + 2 alpha0 - 4 = {df} must be positive"
                )));
            }
            let sp2 = (2.0 * hyper.beta0 + (n - 2.0) * stats.s2) / df;
            ScaledTLaw::new(stats.diff(), (sp2 * (1.0 / n_e + 1.0 / n_r)).sqrt(), df)
        }
        LawMode::Derived => {
            if n < 2.0 {
                return Err(Error::domain("need at least one observation per arm"));
            }
            let (shape, rate) = posterior_precision(hyper, stats);
            let (c_e, p_e) = arm_posterior(hyper, stats.xbar_e, stats.n_e);
            let (c_r, p_r) = arm_posterior(hyper, stats.xbar_r, stats.n_r);
            let scale2 = rate / shape * (1.0 / p_e + 1.0 / p_r);
            ScaledTLaw::new(c_e - c_r, scale2.sqrt(), 2.0 * shape)
        }
    }
}

/// Prior and posterior laws of `μ_E - μ_R` under one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceLaws {
    pub prior: ScaledTLaw,
    pub posterior: ScaledTLaw,
    pub mode: LawMode,
}

impl DifferenceLaws {
    pub fn new(hyper: &Hyperparameters, stats: &SufficientStats, mode: LawMode) -> Result<Self> {
        Ok(DifferenceLaws {
            prior: prior_difference_law(hyper, mode)?,
            posterior: posterior_difference_law(hyper, stats, mode)?,
            mode,
        })
    }
}

/// One draw of `μ_E - μ_R` from the normal-gamma posterior: `1/σ²` from its
/// gamma posterior, then each arm mean from its conditional normal.
pub fn exact_posterior_sampler(
    hyper: &Hyperparameters,
    stats: &SufficientStats,
    stream: &mut RandomStream,
) -> Result<f64> {
    let (shape, rate) = posterior_precision(hyper, stats);
    let precision = sample_gamma(stream, shape, rate)?;
    let (c_e, p_e) = arm_posterior(hyper, stats.xbar_e, stats.n_e);
    let (c_r, p_r) = arm_posterior(hyper, stats.xbar_r, stats.n_r);
    let mu_e = sample_normal(stream, c_e, (1.0 / (precision * p_e)).sqrt())?;
    let mu_r = sample_normal(stream, c_r, (1.0 / (precision * p_r)).sqrt())?;
    Ok(mu_e - mu_r)
}
