//! Seeded, splittable random streams and the samplers built on them.
//!
//! A [`RandomStream`] is ChaCha8 keyed by a 64-bit seed with the 64-bit
//! ChaCha stream id set to `stream_index`. Distinct indices give
//! non-overlapping keystreams, so Monte Carlo work split into chunks can
//! give each chunk its own index and still reproduce bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

use super::normal::{std_normal_cdf, std_normal_quantile};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RandomStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

pub fn sample_normal(stream: &mut RandomStream, mean: f64, sd: f64) -> Result<f64> {
    if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
        return Err(Error::domain(format!(
            "normal requires finite mean and sd > 0, got mean={mean} sd={sd}"
        )));
    }
    Ok(mean + sd * stream.standard_normal())
}

/// Gamma draw with the given shape and rate (mean `shape / rate`).
pub fn sample_gamma(stream: &mut RandomStream, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(Error::domain(format!(
            "gamma requires positive shape and rate, got shape={shape} rate={rate}"
        )));
    }
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::domain(e.to_string()))?;
    Ok(g.sample(&mut stream.rng))
}

pub fn sample_chi_squared(stream: &mut RandomStream, df: f64) -> Result<f64> {
    if !(df > 0.0 && df.is_finite()) {
        return Err(Error::domain(format!(
            "chi-squared requires df > 0, got {df}"
        )));
    }
    sample_gamma(stream, 0.5 * df, 0.5)
}

/// Normal draw conditioned on `(lo, hi]`, by inversion of the cdf.
///
/// Intervals above the mean are mapped through the reflected (lower-tail)
/// cdf; in exact arithmetic this is the same transform of `u`, and it keeps
/// the truncation mass from cancelling to zero.
pub fn sample_truncated_normal(
    stream: &mut RandomStream,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
        return Err(Error::domain(format!(
            "truncated normal requires finite mean and sd > 0, got mean={mean} sd={sd}"
        )));
    }
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::domain(format!(
            "truncation interval requires lo < hi, got ({lo}, {hi}]"
        )));
    }
    let u = stream.uniform();
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    let z = if a > 0.0 {
        let fb = std_normal_cdf(-b);
        let fa = std_normal_cdf(-a);
        let mass = fa - fb;
        check_mass(mass, lo, hi)?;
        -std_normal_quantile(fb + mass * (1.0 - u))?
    } else {
        let fa = std_normal_cdf(a);
        let fb = std_normal_cdf(b);
        let mass = fb - fa;
        check_mass(mass, lo, hi)?;
        std_normal_quantile(fa + mass * u)?
    };
    let x = mean + sd * z;
    // rounding can land on or outside an endpoint
    Ok(x.clamp(lo.next_up(), hi))
}

fn check_mass(mass: f64, lo: f64, hi: f64) -> Result<()> {
    if mass < 1e-300 || !mass.is_finite() {
        Err(Error::Numeric(format!(
            "truncation mass {mass:e} on ({lo}, {hi}] is too small to sample"
        )))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RandomStream::new(42, 3);
        let mut b = RandomStream::new(42, 3);
        for _ in 0..100 {
            assert_eq!(
                sample_gamma(&mut a, 2.0, 5.0).unwrap().to_bits(),
                sample_gamma(&mut b, 2.0, 5.0).unwrap().to_bits()
            );
        }
        let mut c = RandomStream::new(42, 4);
        let mut d = RandomStream::new(42, 3);
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn chi_squared_mean() {
        let mut s = RandomStream::new(7, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_chi_squared(&mut s, 22.0).unwrap())
            .collect();
        let (m, _) = mean_and_se(&xs);
        let sd = (2.0 * 22.0 / n as f64).sqrt();
        assert!((m - 22.0).abs() < 3.0 * sd, "{m}");
    }

    #[test]
    fn gamma_mean_uses_rate() {
        let mut s = RandomStream::new(11, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_gamma(&mut s, 2.0, 5.0).unwrap())
            .collect();
        let (m, se) = mean_and_se(&xs);
        assert!((m - 0.4).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn invalid_parameters() {
        let mut s = RandomStream::new(1, 0);
        assert!(sample_normal(&mut s, 0.0, 0.0).is_err());
        assert!(sample_gamma(&mut s, -1.0, 1.0).is_err());
        assert!(sample_chi_squared(&mut s, 0.0).is_err());
        assert!(sample_truncated_normal(&mut s, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn truncated_draws_stay_in_range() {
        let mut s = RandomStream::new(5, 0);
        for &(lo, hi) in &[
            (-0.5, 0.5),
            (0.5, 1.5),
            (8.0, 8.001),
            (-30.0, -29.0),
            (-1e-9, 0.0),
        ] {
            for _ in 0..2000 {
                let x = sample_truncated_normal(&mut s, 0.0, 1.0, lo, hi).unwrap();
                assert!(x > lo && x <= hi, "{x} not in ({lo}, {hi}]");
            }
        }
    }

    #[test]
    fn symmetric_truncation_has_zero_mean() {
        let mut s = RandomStream::new(9, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_truncated_normal(&mut s, 0.0, 1.0, -0.5, 0.5).unwrap())
            .collect();
        let (m, se) = mean_and_se(&xs);
        assert!(m.abs() < 3.0 * se);
    }

    #[test]
    fn vanishing_mass_is_an_error() {
        let mut s = RandomStream::new(9, 0);
        assert!(matches!(
            sample_truncated_normal(&mut s, 0.0, 1.0, 50.0, 51.0),
            Err(Error::Numeric(_))
        ));
    }
}
