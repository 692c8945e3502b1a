//! Prior-induced bias for and against `μ_E - μ_R ∈ (-δ, δ]`.
//!
//! Bias against is the prior probability that data generated with the
//! difference inside bin 0 yield `RB(0) < 1`; bias for is the probability
//! that data generated with the difference inside an alternative bin yield
//! `RB(0) > 1`. Both are estimated by simulating `1/σ²` from its prior, the
//! difference from its conditional prior truncated to the bin, and the
//! minimal sufficient statistic from its conditional sampling law.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distributions::{
    sample_chi_squared, sample_gamma, sample_normal, sample_truncated_normal, Probability,
    RandomStream, ScaledTLaw,
};
use crate::elicitation::Hyperparameters;
use crate::montecarlo::{binomial_se, count_hits, Tally};
use crate::relative_belief::{
    posterior_difference_law, prior_difference_law, LawMode, UNSTABLE_PRIOR_MASS,
};
use crate::trial_data::SufficientStats;
use crate::{Error, Result};

pub const DEFAULT_REPS: usize = 100_000;
pub const MIN_REPS: usize = 1_000;

const AGAINST_FAMILY: u32 = 0;
const FOR_FAMILY: u32 = 1;

fn default_alternative_bin() -> i64 {
    1
}

fn default_reps() -> usize {
    DEFAULT_REPS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub hyper: Hyperparameters,
    pub n_e: usize,
    pub n_r: usize,
    pub delta: f64,
    #[serde(default = "default_alternative_bin")]
    pub alternative_bin: i64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: LawMode,
}

impl BiasSpec {
    pub fn new(hyper: Hyperparameters, n_e: usize, n_r: usize, delta: f64, seed: u64) -> Self {
        BiasSpec {
            hyper,
            n_e,
            n_r,
            delta,
            alternative_bin: 1,
            reps: DEFAULT_REPS,
            seed,
            mode: LawMode::PaperLiteral,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.n_e < 1 || self.n_r < 1 || self.n_e + self.n_r < 3 {
            return Err(Error::domain(format!(
                "need n_E, n_R >= 1 and n_E + n_R >= 3, got {} and {}",
                self.n_e, self.n_r
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::domain(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.alternative_bin == 0 {
            return Err(Error::domain("alternative bin must be nonzero"));
        }
        if self.reps < MIN_REPS {
            return Err(Error::domain(format!(
                "reps must be at least {MIN_REPS}, got {}",
                self.reps
            )));
        }
        if self.mode == LawMode::PaperLiteral {
            let df = (self.n_e + self.n_r) as f64 + 2.0 * self.hyper.alpha0 - 4.0;
            if df <= 0.0 {
                return Err(Error::domain(format!(
                    "posterior degrees of freedom {df} must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub p: Probability,
    pub se: f64,
    /// Replications dropped after a numeric failure.
    pub discarded: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub n_e: usize,
    pub n_r: usize,
    pub delta: f64,
    pub alternative_bin: i64,
    pub p_against: Probability,
    pub se_against: f64,
    pub p_for: Probability,
    pub se_for: f64,
    pub discarded: u64,
    pub reps: usize,
    pub seed: u64,
    pub mode: LawMode,
}

/// `RB(0)` from `(x̄_E - x̄_R, s²)` under the closed-form laws quoted for the
/// model, where the posterior depends on the data only through these two.
pub fn rb_zero_from_stats(
    hyper: &Hyperparameters,
    diff_bar: f64,
    s2: f64,
    n_e: usize,
    n_r: usize,
    delta: f64,
) -> Result<f64> {
    let stats = SufficientStats {
        xbar_e: diff_bar,
        xbar_r: 0.0,
        s2,
        n_e,
        n_r,
    };
    rb_zero(hyper, &stats, delta, LawMode::PaperLiteral)
}

/// `RB(0)` for the full statistic under either law mode.
pub fn rb_zero(
    hyper: &Hyperparameters,
    stats: &SufficientStats,
    delta: f64,
    mode: LawMode,
) -> Result<f64> {
    let prior = prior_difference_law(hyper, mode)?;
    rb_zero_with_prior(hyper, &prior, stats, delta, mode)
}

fn rb_zero_with_prior(
    hyper: &Hyperparameters,
    prior: &ScaledTLaw,
    stats: &SufficientStats,
    delta: f64,
    mode: LawMode,
) -> Result<f64> {
    let prior_mass = prior.interval_prob(-delta, delta)?;
    if prior_mass < UNSTABLE_PRIOR_MASS {
        return Err(Error::Unstable(format!(
            "prior mass of (-{delta}, {delta}] is {prior_mass:e}"
        )));
    }
    let posterior = posterior_difference_law(hyper, stats, mode)?;
    Ok(posterior.interval_prob(-delta, delta)? / prior_mass)
}

/// Draws `(x̄_E - x̄_R, s²)` given the difference and `σ²`: independent,
/// `N(true_diff, (1/n_E + 1/n_R)σ²)` and `σ²χ²_k/k` with `k = n_E + n_R - 2`.
pub fn sample_cond_prior_predictive(
    true_diff: f64,
    sigma2: f64,
    n_e: usize,
    n_r: usize,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!(
            "sigma^2 must be positive, got {sigma2}"
        )));
    }
    if n_e == 0 || n_r == 0 || n_e + n_r < 3 {
        return Err(Error::domain(format!(
            "need n_E, n_R >= 1 and n_E + n_R >= 3, got {n_e} and {n_r}"
        )));
    }
    let var = (1.0 / n_e as f64 + 1.0 / n_r as f64) * sigma2;
    let diff_bar = sample_normal(stream, true_diff, var.sqrt())?;
    let k = (n_e + n_r - 2) as f64;
    let s2 = sigma2 * sample_chi_squared(stream, k)? / k;
    Ok((diff_bar, s2))
}

/// One simulated `RB(0)` with the difference drawn from its conditional prior on `(lo, hi]`.
fn simulate_rb_zero(
    spec: &BiasSpec,
    prior: &ScaledTLaw,
    lo: f64,
    hi: f64,
    stream: &mut RandomStream,
) -> Result<f64> {
    let h = &spec.hyper;
    let sigma2 = 1.0 / sample_gamma(stream, h.alpha0, h.beta0)?;
    let diff_sd = (2.0 * h.tau0_sq * sigma2).sqrt();
    let diff = sample_truncated_normal(stream, 0.0, diff_sd, lo, hi)?;
    let stats = match spec.mode {
        LawMode::PaperLiteral => {
            let (diff_bar, s2) =
                sample_cond_prior_predictive(diff, sigma2, spec.n_e, spec.n_r, stream)?;
            SufficientStats {
                xbar_e: diff_bar,
                xbar_r: 0.0,
                s2,
                n_e: spec.n_e,
                n_r: spec.n_r,
            }
        }
        LawMode::Derived => {
            // the sum of the means is independent of their difference a priori
            let sum = sample_normal(stream, 2.0 * h.mu0, diff_sd)?;
            let (mu_e, mu_r) = (0.5 * (sum + diff), 0.5 * (sum - diff));
            let xbar_e = sample_normal(stream, mu_e, (sigma2 / spec.n_e as f64).sqrt())?;
            let xbar_r = sample_normal(stream, mu_r, (sigma2 / spec.n_r as f64).sqrt())?;
            let k = (spec.n_e + spec.n_r - 2) as f64;
            let s2 = sigma2 * sample_chi_squared(stream, k)? / k;
            SufficientStats {
                xbar_e,
                xbar_r,
                s2,
                n_e: spec.n_e,
                n_r: spec.n_r,
            }
        }
    };
    let rb = rb_zero_with_prior(h, prior, &stats, spec.delta, spec.mode)?;
    if rb.is_finite() {
        Ok(rb)
    } else {
        Err(Error::Numeric(format!("non-finite RB(0) = {rb}")))
    }
}

fn estimate(spec: &BiasSpec, bin: i64, family: u32, hit: fn(f64) -> bool) -> Result<BiasEstimate> {
    spec.validate()?;
    let prior = prior_difference_law(&spec.hyper, spec.mode)?;
    let lo = (2 * bin - 1) as f64 * spec.delta;
    let hi = (2 * bin + 1) as f64 * spec.delta;
    let counts = count_hits(spec.reps, spec.seed, family, |stream| {
        let rb = simulate_rb_zero(spec, &prior, lo, hi, stream)?;
        Ok(if hit(rb) { Tally::Hit } else { Tally::Miss })
    })?;
    let p = counts.fraction(spec.reps)?;
    Ok(BiasEstimate {
        p: Probability::new(p)?,
        se: binomial_se(p, counts.used as usize),
        discarded: counts.discarded,
    })
}

/// Prior probability of evidence against bin 0 when it holds: `RB(0) < 1`.
pub fn simulate_bias_against(spec: &BiasSpec) -> Result<BiasEstimate> {
    estimate(spec, 0, AGAINST_FAMILY, |rb| rb < 1.0)
}

/// Prior probability of evidence for bin 0 when the difference lies in the
/// alternative bin: `RB(0) > 1`.
pub fn simulate_bias_for(spec: &BiasSpec) -> Result<BiasEstimate> {
    estimate(spec, spec.alternative_bin, FOR_FAMILY, |rb| rb > 1.0)
}

pub fn simulate_bias(spec: &BiasSpec) -> Result<BiasReport> {
    let against = simulate_bias_against(spec)?;
    let for_ = simulate_bias_for(spec)?;
    Ok(BiasReport {
        n_e: spec.n_e,
        n_r: spec.n_r,
        delta: spec.delta,
        alternative_bin: spec.alternative_bin,
        p_against: against.p,
        se_against: against.se,
        p_for: for_.p,
        se_for: for_.se,
        discarded: against.discarded + for_.discarded,
        reps: spec.reps,
        seed: spec.seed,
        mode: spec.mode,
    })
}

/// Bias for each sample-size pair, reusing `base`'s seed so every pair sees
/// the same random streams.
pub fn design_scan(base: &BiasSpec, sizes: &[(usize, usize)]) -> Result<Vec<BiasReport>> {
    if sizes.is_empty() {
        return Err(Error::domain(
            "design scan needs at least one sample-size pair",
        ));
    }
    sizes
        .iter()
        .map(|&(n_e, n_r)| simulate_bias(&BiasSpec { n_e, n_r, ..*base }))
        .collect()
}

/// Writes `n_E,n_R,p_against,se_against,p_for,se_for`.
pub fn write_design_csv<W: Write>(reports: &[BiasReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["n_E", "n_R", "p_against", "se_against", "p_for", "se_for"])
        .map_err(err)?;
    for r in reports {
        w.write_record([
            r.n_e.to_string(),
            r.n_r.to_string(),
            r.p_against.value().to_string(),
            r.se_against.to_string(),
            r.p_for.value().to_string(),
            r.se_for.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relative_belief::{rb_table, DeltaGrid, DifferenceLaws};

    fn elicited() -> Hyperparameters {
        Hyperparameters::new(0.0, 0.67, 1.0, 8.0).unwrap()
    }

    fn small_spec() -> BiasSpec {
        BiasSpec {
            reps: 2_000,
            ..BiasSpec::new(elicited(), 12, 12, 0.5, 17)
        }
    }

    #[test]
    fn rb_zero_matches_table_row() {
        let stats = SufficientStats {
            xbar_e: 7.208_333_333_333_333,
            xbar_r: 4.175,
            s2: 46.795_075_757_575_76,
            n_e: 12,
            n_r: 12,
        };
        let laws = DifferenceLaws::new(&elicited(), &stats, LawMode::PaperLiteral).unwrap();
        let t = rb_table(&laws, &DeltaGrid::for_laws(0.5, &laws).unwrap()).unwrap();
        let rb = rb_zero_from_stats(&elicited(), stats.diff(), stats.s2, 12, 12, 0.5).unwrap();
        assert!((rb - t.row(0).unwrap().rb).abs() < 1e-9);
    }

    #[test]
    fn concentrated_data_at_zero_favor_h0() {
        let rb = rb_zero_from_stats(&elicited(), 0.0, 0.5, 30, 30, 0.5).unwrap();
        assert!(rb > 1.0, "{rb}");
    }

    #[test]
    fn huge_margin_gives_unit_ratio() {
        let rb = rb_zero_from_stats(&elicited(), 3.0, 40.0, 12, 12, 1e9).unwrap();
        assert!((rb - 1.0).abs() < 1e-6, "{rb}");
    }

    #[test]
    fn predictive_rejects_bad_variance() {
        let mut s = RandomStream::new(1, 0);
        assert!(sample_cond_prior_predictive(0.0, 0.0, 5, 5, &mut s).is_err());
        assert!(sample_cond_prior_predictive(0.0, 1.0, 1, 1, &mut s).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = simulate_bias(&small_spec()).unwrap();
        let b = simulate_bias(&small_spec()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_se_is_binomial() {
        let r = simulate_bias(&small_spec()).unwrap();
        let p = r.p_against.value();
        assert!((r.se_against - (p * (1.0 - p) / 2000.0).sqrt()).abs() < 1e-15);
        assert_eq!(r.discarded, 0);
    }

    #[test]
    fn invalid_specs() {
        let mut s = small_spec();
        s.alternative_bin = 0;
        assert!(simulate_bias_for(&s).is_err());
        let mut s = small_spec();
        s.reps = 10;
        assert!(simulate_bias_against(&s).is_err());
        assert!(design_scan(&small_spec(), &[]).is_err());
    }

    #[test]
    fn derived_mode_runs() {
        let s = BiasSpec {
            mode: LawMode::Derived,
            ..small_spec()
        };
        let r = simulate_bias(&s).unwrap();
        assert!(r.p_against.value() > 0.0 && r.p_for.value() > 0.0);
    }

    #[test]
    fn design_csv_columns() {
        let rows = design_scan(&small_spec(), &[(12, 12)]).unwrap();
        let mut buf = Vec::new();
        write_design_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n_E,n_R,p_against,se_against,p_for,se_for\n12,12,"));
    }
}
