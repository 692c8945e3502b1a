//! Prior-data conflict checks based on the prior predictive laws of the
//! minimal sufficient statistic.
//!
//! The variance is checked first through `V = (n_E + n_R - 2)s²`, whose
//! prior predictive law does not involve the means. Only when that check
//! passes are the arm means checked against their bivariate t prior
//! predictive.

use serde::{Deserialize, Serialize};

use crate::distributions::special::ln_gamma;
use crate::distributions::{
    bivariate_t_logpdf, sample_chi_squared, sample_gamma, sample_normal, DiagonalScale,
    Probability, RandomStream,
};
use crate::elicitation::Hyperparameters;
use crate::montecarlo::{count_hits, Tally};
use crate::trial_data::SufficientStats;
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const MIN_REPS: usize = 1_000;

const VARIANCE_FAMILY: u32 = 10;
const MEANS_FAMILY: u32 = 11;

/// Log prior predictive density of `V = (n_E + n_R - 2)s²` with `k` degrees of freedom.
///
/// Equivalently `V ~ (kβ₀/α₀) F(k, 2α₀)`.
pub fn prior_predictive_v_logdensity(v: f64, hyper: &Hyperparameters, k: usize) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("v must be positive, got {v}")));
    }
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let (a, b) = (hyper.alpha0, hyper.beta0);
    let half_k = 0.5 * k as f64;
    let r = v / (2.0 * b);
    Ok(
        ln_gamma(half_k + a) - ln_gamma(a) - ln_gamma(half_k) + (half_k - 1.0) * r.ln()
            - (half_k + a) * r.ln_1p()
            - (2.0 * b).ln(),
    )
}

/// Score ranking `v` in the variance check: `log m_V(v) + ½ log v`.
///
/// The `½ log v` term makes the p-value invariant under rescaling of `v`.
pub fn variance_check_score(v: f64, hyper: &Hyperparameters, k: usize) -> Result<f64> {
    Ok(prior_predictive_v_logdensity(v, hyper, k)? + 0.5 * v.ln())
}

/// Log prior predictive density of the arm means `(x̄_E, x̄_R)`.
pub fn prior_predictive_means_logdensity(
    u: [f64; 2],
    hyper: &Hyperparameters,
    n_e: usize,
    n_r: usize,
) -> Result<f64> {
    bivariate_t_logpdf(
        u,
        2.0 * hyper.alpha0,
        [hyper.mu0, hyper.mu0],
        means_scale(hyper, n_e, n_r)?,
    )
}

fn means_scale(hyper: &Hyperparameters, n_e: usize, n_r: usize) -> Result<DiagonalScale> {
    if n_e == 0 || n_r == 0 {
        return Err(Error::domain("both arms need at least one observation"));
    }
    let c = hyper.beta0 / hyper.alpha0;
    DiagonalScale::new(
        c * (hyper.tau0_sq + 1.0 / n_e as f64),
        c * (hyper.tau0_sq + 1.0 / n_r as f64),
    )
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::domain(format!(
            "reps must be at least {MIN_REPS}, got {reps}"
        )));
    }
    Ok(())
}

/// One draw of `V` from its prior predictive: `σ²χ²_k` with `1/σ²` from the prior.
pub fn sample_prior_predictive_v(
    hyper: &Hyperparameters,
    k: usize,
    stream: &mut RandomStream,
) -> Result<f64> {
    let sigma2 = 1.0 / sample_gamma(stream, hyper.alpha0, hyper.beta0)?;
    Ok(sigma2 * sample_chi_squared(stream, k as f64)?)
}

/// One draw of the arm means from their prior predictive, as a normal mixture.
pub fn sample_prior_predictive_means(
    hyper: &Hyperparameters,
    n_e: usize,
    n_r: usize,
    stream: &mut RandomStream,
) -> Result<[f64; 2]> {
    let sigma2 = 1.0 / sample_gamma(stream, hyper.alpha0, hyper.beta0)?;
    let sd_e = (sigma2 * (hyper.tau0_sq + 1.0 / n_e as f64)).sqrt();
    let sd_r = (sigma2 * (hyper.tau0_sq + 1.0 / n_r as f64)).sqrt();
    Ok([
        sample_normal(stream, hyper.mu0, sd_e)?,
        sample_normal(stream, hyper.mu0, sd_r)?,
    ])
}

/// Prior predictive probability of a variance score no larger than the observed one.
pub fn check_variance_prior(
    hyper: &Hyperparameters,
    stats: &SufficientStats,
    reps: usize,
    seed: u64,
) -> Result<Probability> {
    hyper.validate()?;
    check_reps(reps)?;
    if stats.s2 <= 0.0 {
        return Err(Error::Degenerate("pooled variance is zero".into()));
    }
    let k = stats.pooled_df();
    if k == 0 {
        return Err(Error::domain("need n_E + n_R >= 3"));
    }
    let observed = variance_check_score(k as f64 * stats.s2, hyper, k)?;
    let counts = count_hits(reps, seed, VARIANCE_FAMILY, |stream| {
        let v = sample_prior_predictive_v(hyper, k, stream)?;
        let score = variance_check_score(v, hyper, k)?;
        Ok(if score <= observed {
            Tally::Hit
        } else {
            Tally::Miss
        })
    })?;
    Probability::new(counts.fraction(reps)?)
}

/// Prior predictive probability of a means density no larger than the observed one.
pub fn check_means_prior(
    hyper: &Hyperparameters,
    stats: &SufficientStats,
    reps: usize,
    seed: u64,
) -> Result<Probability> {
    hyper.validate()?;
    check_reps(reps)?;
    let (n_e, n_r) = (stats.n_e, stats.n_r);
    let observed =
        prior_predictive_means_logdensity([stats.xbar_e, stats.xbar_r], hyper, n_e, n_r)?;
    let counts = count_hits(reps, seed, MEANS_FAMILY, |stream| {
        let u = sample_prior_predictive_means(hyper, n_e, n_r, stream)?;
        let score = prior_predictive_means_logdensity(u, hyper, n_e, n_r)?;
        Ok(if score <= observed {
            Tally::Hit
        } else {
            Tally::Miss
        })
    })?;
    Probability::new(counts.fraction(reps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    VarianceConflict,
    MeansConflict,
    NoConflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub p_variance: Probability,
    /// Absent when the variance check already signals a conflict.
    pub p_means: Option<Probability>,
    pub threshold: f64,
    pub verdict: Verdict,
    pub reps: usize,
    pub seed: u64,
}

/// Variance check, then, only if it passes, the means check.
pub fn check_prior(
    hyper: &Hyperparameters,
    stats: &SufficientStats,
    reps: usize,
    threshold: f64,
    seed: u64,
) -> Result<ConflictReport> {
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(Error::domain(format!(
            "threshold must lie in (0, 0.5), got {threshold}"
        )));
    }
    let p_variance = check_variance_prior(hyper, stats, reps, seed)?;
    let (p_means, verdict) = if p_variance.value() < threshold {
        (None, Verdict::VarianceConflict)
    } else {
        let p = check_means_prior(hyper, stats, reps, seed)?;
        let verdict = if p.value() < threshold {
            Verdict::MeansConflict
        } else {
            Verdict::NoConflict
        };
        (Some(p), verdict)
    };
    Ok(ConflictReport {
        p_variance,
        p_means,
        threshold,
        verdict,
        reps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elicited() -> Hyperparameters {
        Hyperparameters::new(0.0, 0.67, 1.0, 8.0).unwrap()
    }

    fn worked_stats() -> SufficientStats {
        SufficientStats {
            xbar_e: 7.208_333_333_333_333,
            xbar_r: 4.175,
            s2: 46.795_075_757_575_76,
            n_e: 12,
            n_r: 12,
        }
    }

    #[test]
    fn two_df_unit_shape_specialization() {
        let h = Hyperparameters::new(0.0, 1.0, 1.0, 3.0).unwrap();
        let v = 2.0 * h.beta0;
        let direct = (1.0 / (2.0 * h.beta0)) * (1.0 + v / (2.0 * h.beta0)).powi(-2);
        let general = prior_predictive_v_logdensity(v, &h, 2).unwrap().exp();
        assert!((direct - general).abs() < 1e-14);
        assert!((general - 1.0 / (8.0 * h.beta0)).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_v_is_domain_error() {
        assert!(prior_predictive_v_logdensity(0.0, &elicited(), 22).is_err());
        assert!(prior_predictive_v_logdensity(-1.0, &elicited(), 22).is_err());
    }

    #[test]
    fn density_mode_gives_p_one() {
        let h = elicited();
        let s = SufficientStats {
            xbar_e: h.mu0,
            xbar_r: h.mu0,
            ..worked_stats()
        };
        assert_eq!(check_means_prior(&h, &s, 2000, 3).unwrap().value(), 1.0);
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let s = SufficientStats {
            s2: 0.0,
            ..worked_stats()
        };
        assert!(matches!(
            check_variance_prior(&elicited(), &s, 2000, 1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn deterministic() {
        let a = check_prior(&elicited(), &worked_stats(), 4000, 0.05, 8).unwrap();
        let b = check_prior(&elicited(), &worked_stats(), 4000, 0.05, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn huge_variance_conflicts() {
        let s = SufficientStats {
            s2: 1e6 * 8.0,
            ..worked_stats()
        };
        let r = check_prior(&elicited(), &s, 4000, 0.05, 2).unwrap();
        assert_eq!(r.verdict, Verdict::VarianceConflict);
        assert_eq!(r.p_means, None);
    }

    #[test]
    fn strict_threshold_flags_variance() {
        let r = check_prior(&elicited(), &worked_stats(), 4000, 0.3, 2).unwrap();
        assert_eq!(r.verdict, Verdict::VarianceConflict);
        assert!(check_prior(&elicited(), &worked_stats(), 4000, 0.5, 2).is_err());
    }
}
