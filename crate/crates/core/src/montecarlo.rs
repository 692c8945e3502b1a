//! Chunked, seeded Monte Carlo driver shared by the simulation modules.

use rayon::prelude::*;

use crate::distributions::RandomStream;
use crate::{Error, Result};

/// Replications per chunk; each chunk owns one stream.
pub const CHUNK_SIZE: usize = 4096;

/// Largest fraction of replications whose numeric failure may be discarded.
pub const MAX_DISCARD_FRACTION: f64 = 1e-3;

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tally {
    Hit,
    Miss,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Counts {
    pub hits: u64,
    pub used: u64,
    pub discarded: u64,
    pub first_error: Option<Error>,
}

impl Counts {
    fn merge(mut self, other: Counts) -> Counts {
        self.hits += other.hits;
        self.used += other.used;
        self.discarded += other.discarded;
        if self.first_error.is_none() {
            self.first_error = other.first_error;
        }
        self
    }

    /// Fraction of hits among the replications kept, failing when too many
    /// replications had to be discarded.
    pub fn fraction(&self, reps: usize) -> Result<f64> {
        if self.discarded as f64 >= MAX_DISCARD_FRACTION * reps as f64 || self.used == 0 {
            let cause = self
                .first_error
                .clone()
                .unwrap_or_else(|| Error::Numeric("no replication succeeded".into()));
            return Err(Error::Numeric(format!(
                "{} of {reps} replications failed; first failure: {cause}",
                self.discarded
            )));
        }
        Ok(self.hits as f64 / self.used as f64)
    }
}

/// Stream index of chunk `chunk` within the family `family`.
pub(crate) fn stream_index(family: u32, chunk: usize) -> u64 {
    ((family as u64) << 32) | chunk as u64
}

/// Runs `reps` replications of `rep` split into chunks of `CHUNK_SIZE`,
/// chunk `c` drawing from stream `stream_index(family, c)` of `seed`.
///
/// Domain and numeric errors raised by a replication are counted, any other
/// error aborts the run. The result does not depend on thread scheduling.
pub(crate) fn count_hits<F>(reps: usize, seed: u64, family: u32, rep: F) -> Result<Counts>
where
    F: Fn(&mut RandomStream) -> Result<Tally> + Sync,
{
    let chunks = reps.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Result<Counts>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = RandomStream::new(seed, stream_index(family, c));
            let n = CHUNK_SIZE.min(reps - c * CHUNK_SIZE);
            let mut counts = Counts::default();
            for _ in 0..n {
                match rep(&mut stream) {
                    Ok(Tally::Hit) => {
                        counts.hits += 1;
                        counts.used += 1;
                    }
                    Ok(Tally::Miss) => counts.used += 1,
                    Err(e @ (Error::Numeric(_) | Error::Domain(_) | Error::Unstable(_))) => {
                        counts.discarded += 1;
                        counts.first_error.get_or_insert(e);
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(counts)
        })
        .collect();
    per_chunk
        .into_iter()
        .try_fold(Counts::default(), |acc, c| Ok(acc.merge(c?)))
}

/// Binomial standard error `√(p(1-p)/n)`.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
