use serde::{Deserialize, Serialize};

use crate::distributions::Probability;
use crate::{Error, Result};

use super::grid::{rb_table, DeltaGrid, RbRow, RbTable, UNSTABLE_PRIOR_MASS};
use super::DifferenceLaws;

/// Relative tolerance under which two ratios count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn at_most(rb: f64, bound: f64) -> bool {
    rb <= bound + TIE_TOLERANCE * bound.abs()
}

fn row_at(table: &RbTable, i: i64) -> Result<&RbRow> {
    table.row(i).ok_or_else(|| {
        Error::domain(format!(
            "bin {i} outside grid [{}, {}]",
            table.grid.i_min, table.grid.i_max
        ))
    })
}

/// Posterior mass of the bins whose ratio does not exceed that of bin `i0`.
pub fn strength(table: &RbTable, i0: i64) -> Result<Probability> {
    let rb0 = row_at(table, i0)?.rb;
    if rb0.is_nan() {
        return Err(Error::Unstable(format!("bin {i0} has zero prior mass")));
    }
    let s: f64 = table
        .rows
        .iter()
        .filter(|r| !r.rb.is_nan() && at_most(r.rb, rb0))
        .map(|r| r.posterior_mass)
        .sum();
    Probability::new(s.min(1.0))
}

/// Least relative surprise estimate: the stable bin with the largest ratio.
///
/// Ties go to the smallest `|i|`, then to the negative index.
pub fn lrse(table: &RbTable) -> Result<i64> {
    let mut best: Option<&RbRow> = None;
    for r in table.rows.iter().filter(|r| !r.unstable) {
        best = match best {
            None => Some(r),
            Some(b) => {
                let tied = (r.rb - b.rb).abs() <= TIE_TOLERANCE * b.rb.abs();
                let closer = (r.bin_index.abs(), r.bin_index) < (b.bin_index.abs(), b.bin_index);
                if (tied && closer) || (!tied && r.rb > b.rb) {
                    Some(r)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.map(|r| r.bin_index)
        .ok_or_else(|| Error::Estimation("every bin has negligible prior mass".into()))
}

/// The half-open interval `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::serde_ext")]
    pub lower: f64,
    #[serde(with = "crate::serde_ext")]
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibleRegion {
    pub gamma: f64,
    /// Ratio threshold `c_γ`; member bins have `rb ≥ c_γ`.
    pub threshold: f64,
    pub bins: Vec<i64>,
    /// `(lower, upper]` when the member bins are contiguous.
    pub interval: Option<Interval>,
    pub posterior_mass: f64,
}

/// Bins with `rb ≥ c_γ`, where `c_γ` is the smallest attained ratio whose
/// upper set has posterior mass at most `γ`.
///
/// When no attained ratio qualifies, `c_γ` is the largest ratio so the
/// region is never empty and always holds the LRSE. Unstable bins never
/// belong to the region.
pub fn credible_region(table: &RbTable, gamma: f64) -> Result<CredibleRegion> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::domain(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    let mut stable: Vec<&RbRow> = table.rows.iter().filter(|r| !r.unstable).collect();
    if stable.is_empty() {
        return Err(Error::Estimation(
            "every bin has negligible prior mass".into(),
        ));
    }
    stable.sort_by(|a, b| b.rb.total_cmp(&a.rb));
    let mut threshold = stable[0].rb;
    let mut k = 0;
    let mut mass = 0.0;
    while k < stable.len() {
        // the whole group tied with stable[k] enters together
        let level = stable[k].rb;
        let mut end = k;
        let mut group = 0.0;
        while end < stable.len() && stable[end].rb >= level - TIE_TOLERANCE * level.abs() {
            group += stable[end].posterior_mass;
            end += 1;
        }
        if mass + group > gamma {
            break;
        }
        mass += group;
        threshold = level;
        k = end;
    }
    let mut bins: Vec<i64> = stable
        .iter()
        .filter(|r| r.rb >= threshold - TIE_TOLERANCE * threshold.abs())
        .map(|r| r.bin_index)
        .collect();
    bins.sort_unstable();
    let posterior_mass = bins
        .iter()
        .map(|&i| table.row(i).map_or(0.0, |r| r.posterior_mass))
        .sum();
    let contiguous = bins.windows(2).all(|w| w[1] == w[0] + 1);
    let interval = match (contiguous, bins.first(), bins.last()) {
        (true, Some(&a), Some(&b)) => Some(Interval {
            lower: row_at(table, a)?.lower,
            upper: row_at(table, b)?.upper,
        }),
        _ => None,
    };
    Ok(CredibleRegion {
        gamma,
        threshold,
        bins,
        interval,
        posterior_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalHypothesis {
    #[serde(with = "crate::serde_ext")]
    pub lower: f64,
    #[serde(with = "crate::serde_ext")]
    pub upper: f64,
    pub prior_prob: f64,
    pub posterior_prob: f64,
    pub rb: f64,
}

/// Relative belief ratio of `μ_E - μ_R ∈ (a, b]`; `b` may be `+inf`.
pub fn interval_hypothesis_rb(laws: &DifferenceLaws, a: f64, b: f64) -> Result<IntervalHypothesis> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(Error::domain(format!(
            "interval requires a < b, got ({a}, {b}]"
        )));
    }
    let prior_prob = laws.prior.interval_prob(a, b)?;
    if prior_prob < UNSTABLE_PRIOR_MASS {
        return Err(Error::Unstable(format!(
            "prior probability of ({a}, {b}] is {prior_prob:e}"
        )));
    }
    let posterior_prob = laws.posterior.interval_prob(a, b)?;
    Ok(IntervalHypothesis {
        lower: a,
        upper: b,
        prior_prob,
        posterior_prob,
        rb: posterior_prob / prior_prob,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    EvidenceForWeak,
    EvidenceForStrong,
    EvidenceAgainstWeak,
    EvidenceAgainstStrong,
    Inconclusive,
}

/// Cut points for calling a strength small or large.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationThresholds {
    pub small: f64,
    pub large: f64,
}

impl Default for ClassificationThresholds {
    fn default() -> Self {
        ClassificationThresholds {
            small: 0.05,
            large: 0.95,
        }
    }
}

impl ClassificationThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.small && self.small < self.large && self.large <= 1.0) {
            return Err(Error::domain(format!(
                "thresholds need 0 <= small < large <= 1, got {} and {}",
                self.small, self.large
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub classification: Classification,
    pub rb0: f64,
    pub strength0: Probability,
    pub prior_mass_at_0: Probability,
    pub posterior_mass_at_0: Probability,
    pub thresholds: ClassificationThresholds,
}

/// Evidence about bin 0, checking `Π(0 | x) ≤ strength ≤ RB(0)`.
pub fn evidence_classification(
    table: &RbTable,
    thresholds: ClassificationThresholds,
) -> Result<Evidence> {
    thresholds.validate()?;
    let row = *row_at(table, 0)?;
    if row.unstable {
        return Err(Error::Unstable(format!(
            "prior mass of bin 0 is {:e}",
            row.prior_mass
        )));
    }
    let rb0 = row.rb;
    let strength0 = strength(table, 0)?;
    let s = strength0.value();
    let slack = 1e-12;
    if row.posterior_mass > s + slack || s > rb0 + slack {
        return Err(Error::Consistency(format!(
            "expected posterior {} <= strength {s} <= rb {rb0}",
            row.posterior_mass
        )));
    }
    let corner = row.prior_mass >= thresholds.small
        && row.posterior_mass < thresholds.small
        && s > thresholds.large;
    let classification = if rb0 == 1.0 || corner {
        Classification::Inconclusive
    } else if rb0 < 1.0 {
        if s < thresholds.small {
            Classification::EvidenceAgainstStrong
        } else {
            Classification::EvidenceAgainstWeak
        }
    } else if s > thresholds.large {
        Classification::EvidenceForStrong
    } else {
        Classification::EvidenceForWeak
    };
    Ok(Evidence {
        classification,
        rb0,
        strength0,
        prior_mass_at_0: Probability::new(row.prior_mass)?,
        posterior_mass_at_0: Probability::new(row.posterior_mass)?,
        thresholds,
    })
}

/// Complete relative belief assessment of `μ_E - μ_R ∈ (-δ, δ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbAnalysis {
    pub laws: DifferenceLaws,
    pub table: RbTable,
    pub rb0: f64,
    pub strength0: Probability,
    pub lrse_bin: i64,
    /// The LRSE sits in a lumped end bin.
    pub lrse_at_boundary: bool,
    pub credible: CredibleRegion,
    pub prior_mass_at_0: Probability,
    pub posterior_mass_at_0: Probability,
    pub classification: Classification,
    pub thresholds: ClassificationThresholds,
}

pub fn analyze(
    laws: &DifferenceLaws,
    grid: &DeltaGrid,
    gamma: f64,
    thresholds: ClassificationThresholds,
) -> Result<RbAnalysis> {
    let table = rb_table(laws, grid)?;
    let evidence = evidence_classification(&table, thresholds)?;
    let lrse_bin = lrse(&table)?;
    let credible = credible_region(&table, gamma)?;
    Ok(RbAnalysis {
        laws: *laws,
        rb0: evidence.rb0,
        strength0: evidence.strength0,
        lrse_bin,
        lrse_at_boundary: lrse_bin == grid.i_min || lrse_bin == grid.i_max,
        credible,
        prior_mass_at_0: evidence.prior_mass_at_0,
        posterior_mass_at_0: evidence.posterior_mass_at_0,
        classification: evidence.classification,
        thresholds,
        table,
    })
}
