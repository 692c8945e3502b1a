//! Relative belief assessment of equivalence and noninferiority hypotheses
//! in two-arm normal trials.
//!
//! The pipeline mirrors a typical analysis: summarize the data
//! ([`trial_data`]), elicit a conjugate prior ([`elicitation`]), check the
//! prior against the data ([`checks`]), measure the bias the prior induces
//! ([`bias`]) and finally compute relative belief ratios, their strength,
//! the least relative surprise estimate and credible regions
//! ([`relative_belief`]).

pub mod bias;
pub mod checks;
pub mod distributions;
pub mod elicitation;
mod error;
mod montecarlo;
pub mod relative_belief;
mod serde_ext;
pub mod trial_data;

pub use error::{Error, Result};
pub use montecarlo::{binomial_se, CHUNK_SIZE, MAX_DISCARD_FRACTION};
