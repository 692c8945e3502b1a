//! Laws of `μ_E - μ_R`, δ-binned relative belief ratios and the inferences
//! built on them.

mod grid;
mod inference;
mod laws;

pub use grid::{
    density_curve, rb_table, CurvePoint, DeltaGrid, RbRow, RbTable, TailPolicy, DEFAULT_TAIL_MASS,
    MAX_BINS_PER_SIDE, UNSTABLE_PRIOR_MASS,
};
pub use inference::{
    analyze, credible_region, evidence_classification, interval_hypothesis_rb, lrse, strength,
    Classification, ClassificationThresholds, CredibleRegion, Evidence, Interval,
    IntervalHypothesis, RbAnalysis, TIE_TOLERANCE,
};
pub use laws::{
    exact_posterior_sampler, posterior_difference_law, prior_difference_law, DifferenceLaws,
    LawMode,
};
