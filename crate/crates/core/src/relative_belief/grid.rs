use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distributions::ScaledTLaw;
use crate::{Error, Result};

use super::DifferenceLaws;

/// Mass each law may leave beyond the default grid, per side.
pub const DEFAULT_TAIL_MASS: f64 = 5e-7;
/// Largest number of bins on either side of zero the default grid will use.
pub const MAX_BINS_PER_SIDE: i64 = 200_000;
/// Prior bin mass below which a ratio is flagged unstable.
pub const UNSTABLE_PRIOR_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    #[default]
    LumpIntoEndBins,
}

/// Bins `((2i-1)δ, (2i+1)δ]` for `i_min ≤ i ≤ i_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaGrid {
    pub delta: f64,
    pub i_min: i64,
    pub i_max: i64,
    #[serde(default)]
    pub tail_policy: TailPolicy,
}

/// Index of the bin containing `x`.
fn bin_of(x: f64, delta: f64) -> f64 {
    ((x / delta - 1.0) / 2.0).ceil()
}

impl DeltaGrid {
    pub fn new(delta: f64, i_min: i64, i_max: i64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if i_min > 0 || i_max < 0 {
            return Err(Error::domain(format!(
                "grid must contain bin 0, got [{i_min}, {i_max}]"
            )));
        }
        Ok(DeltaGrid {
            delta,
            i_min,
            i_max,
            tail_policy: TailPolicy::LumpIntoEndBins,
        })
    }

    /// Smallest grid leaving less than `DEFAULT_TAIL_MASS` of every law
    /// outside it on each side, capped at `MAX_BINS_PER_SIDE`.
    pub fn covering(delta: f64, laws: &[ScaledTLaw]) -> Result<Self> {
        let mut grid = DeltaGrid::new(delta, 0, 0)?;
        for law in laws {
            let lo = law.quantile(DEFAULT_TAIL_MASS)?;
            let hi = law.quantile(1.0 - DEFAULT_TAIL_MASS)?;
            let lo = bin_of(lo, delta).max(-MAX_BINS_PER_SIDE as f64) as i64;
            let hi = bin_of(hi, delta).min(MAX_BINS_PER_SIDE as f64) as i64;
            grid.i_min = grid.i_min.min(lo);
            grid.i_max = grid.i_max.max(hi);
        }
        Ok(grid)
    }

    pub fn for_laws(delta: f64, laws: &DifferenceLaws) -> Result<Self> {
        DeltaGrid::covering(delta, &[laws.prior, laws.posterior])
    }

    pub fn len(&self) -> usize {
        (self.i_max - self.i_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64) -> bool {
        (self.i_min..=self.i_max).contains(&i)
    }

    /// Nominal bounds of bin `i`, ignoring lumping.
    pub fn nominal_bounds(&self, i: i64) -> (f64, f64) {
        let d = self.delta;
        ((2 * i - 1) as f64 * d, (2 * i + 1) as f64 * d)
    }

    /// Bounds of bin `i` with the end bins extended to infinity.
    pub fn bounds(&self, i: i64) -> (f64, f64) {
        let (mut lo, mut hi) = self.nominal_bounds(i);
        if i == self.i_min {
            lo = f64::NEG_INFINITY;
        }
        if i == self.i_max {
            hi = f64::INFINITY;
        }
        (lo, hi)
    }

    /// Mass of the nominal grid range under `law`, before lumping.
    pub fn coverage(&self, law: &ScaledTLaw) -> Result<f64> {
        law.interval_prob(
            self.nominal_bounds(self.i_min).0,
            self.nominal_bounds(self.i_max).1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbRow {
    pub bin_index: i64,
    #[serde(with = "crate::serde_ext")]
    pub lower: f64,
    #[serde(with = "crate::serde_ext")]
    pub upper: f64,
    pub prior_mass: f64,
    pub posterior_mass: f64,
    /// `posterior_mass / prior_mass`; NaN when the prior mass is exactly 0.
    #[serde(with = "crate::serde_ext")]
    pub rb: f64,
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbTable {
    pub grid: DeltaGrid,
    pub rows: Vec<RbRow>,
}

/// Relative belief ratio of every bin of `grid`.
pub fn rb_table(laws: &DifferenceLaws, grid: &DeltaGrid) -> Result<RbTable> {
    let rows = (grid.i_min..=grid.i_max)
        .map(|i| {
            let (lower, upper) = grid.bounds(i);
            let prior_mass = laws.prior.interval_prob(lower, upper)?;
            let posterior_mass = laws.posterior.interval_prob(lower, upper)?;
            let rb = if prior_mass > 0.0 {
                posterior_mass / prior_mass
            } else {
                f64::NAN
            };
            Ok(RbRow {
                bin_index: i,
                lower,
                upper,
                prior_mass,
                posterior_mass,
                rb,
                unstable: prior_mass < UNSTABLE_PRIOR_MASS,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RbTable { grid: *grid, rows })
}

impl RbTable {
    pub fn row(&self, i: i64) -> Option<&RbRow> {
        if self.grid.contains(i) {
            self.rows.get((i - self.grid.i_min) as usize)
        } else {
            None
        }
    }

    pub fn prior_total(&self) -> f64 {
        self.rows.iter().map(|r| r.prior_mass).sum()
    }

    pub fn posterior_total(&self) -> f64 {
        self.rows.iter().map(|r| r.posterior_mass).sum()
    }

    /// Writes `bin_index,lower,upper,prior_mass,posterior_mass,rb`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record([
            "bin_index",
            "lower",
            "upper",
            "prior_mass",
            "posterior_mass",
            "rb",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.bin_index.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.prior_mass.to_string(),
                r.posterior_mass.to_string(),
                r.rb.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub prior_density: f64,
    pub posterior_density: f64,
    #[serde(with = "crate::serde_ext")]
    pub rb: f64,
}

/// Densities and their ratio on `points` equally spaced values in `[lo, hi]`.
pub fn density_curve(
    laws: &DifferenceLaws,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<CurvePoint>> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi || points < 2 {
        return Err(Error::domain(format!(
            "curve needs finite lo < hi and at least 2 points, got [{lo}, {hi}] with {points}"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            let x = lo + step * k as f64;
            let prior_density = laws.prior.pdf(x);
            let posterior_density = laws.posterior.pdf(x);
            CurvePoint {
                x,
                prior_density,
                posterior_density,
                rb: posterior_density / prior_density,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relative_belief::LawMode;

    fn laws(prior: ScaledTLaw, posterior: ScaledTLaw) -> DifferenceLaws {
        DifferenceLaws {
            prior,
            posterior,
            mode: LawMode::PaperLiteral,
        }
    }

    #[test]
    fn bin_membership() {
        assert_eq!(bin_of(0.0, 0.5), 0.0);
        assert_eq!(bin_of(0.5, 0.5), 0.0);
        assert_eq!(bin_of(0.500001, 0.5), 1.0);
        assert_eq!(bin_of(-0.5, 0.5), -1.0);
        assert_eq!(bin_of(13.5, 0.5), 13.0);
    }

    #[test]
    fn grid_requires_bin_zero() {
        assert!(DeltaGrid::new(0.5, 1, 4).is_err());
        assert!(DeltaGrid::new(0.0, -1, 1).is_err());
        let g = DeltaGrid::new(0.5, -2, 3).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.bounds(0), (-0.5, 0.5));
        assert_eq!(g.bounds(-2).0, f64::NEG_INFINITY);
        assert_eq!(g.bounds(3).1, f64::INFINITY);
    }

    #[test]
    fn default_grid_covers_both_laws() {
        let l = laws(
            ScaledTLaw::new(0.0, 2.3, 2.0).unwrap(),
            ScaledTLaw::new(3.0, 2.8, 22.0).unwrap(),
        );
        let g = DeltaGrid::for_laws(0.5, &l).unwrap();
        assert!(g.coverage(&l.prior).unwrap() > 1.0 - 1e-6);
        assert!(g.coverage(&l.posterior).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn identical_laws_give_unit_ratios() {
        let law = ScaledTLaw::new(0.4, 1.7, 5.0).unwrap();
        let l = laws(law, law);
        let t = rb_table(&l, &DeltaGrid::for_laws(0.5, &l).unwrap()).unwrap();
        for r in t.rows.iter().filter(|r| !r.unstable) {
            assert!((r.rb - 1.0).abs() < 1e-12);
        }
        assert!((t.prior_total() - 1.0).abs() < 1e-9);
        assert!((t.posterior_total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tiny_prior_mass_is_flagged() {
        let l = laws(
            ScaledTLaw::new(0.0, 0.01, 50.0).unwrap(),
            ScaledTLaw::new(0.0, 1.0, 50.0).unwrap(),
        );
        let t = rb_table(&l, &DeltaGrid::new(0.5, -3, 3).unwrap()).unwrap();
        assert!(!t.row(0).unwrap().unstable);
        assert!(t.row(2).unwrap().unstable);
        assert!(t.row(4).is_none());
    }

    #[test]
    fn csv_has_expected_columns() {
        let law = ScaledTLaw::new(0.0, 1.0, 5.0).unwrap();
        let t = rb_table(&laws(law, law), &DeltaGrid::new(1.0, -1, 1).unwrap()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "bin_index,lower,upper,prior_mass,posterior_mass,rb"
        );
        assert!(lines.next().unwrap().starts_with("-1,-inf,-1,"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn curve_ratio_matches_densities() {
        let l = laws(
            ScaledTLaw::new(0.0, 2.0, 2.0).unwrap(),
            ScaledTLaw::new(1.0, 1.0, 20.0).unwrap(),
        );
        let c = density_curve(&l, -5.0, 5.0, 11).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c[5].x, 0.0);
        assert!((c[5].rb - l.posterior.pdf(0.0) / l.prior.pdf(0.0)).abs() < 1e-14);
        assert!(density_curve(&l, 1.0, 1.0, 5).is_err());
    }
}
