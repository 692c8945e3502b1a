//! Two-arm data, its minimal sufficient statistic, residuals and model checks.

mod shapiro_wilk;

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::distributions::std_normal_quantile;
use crate::{Error, Result};

pub use shapiro_wilk::{shapiro_wilk, ShapiroWilk};

/// Responses from the experimental (E) and reference (R) arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoArmData {
    pub experimental: Vec<f64>,
    pub reference: Vec<f64>,
}

impl TwoArmData {
    pub fn new(experimental: Vec<f64>, reference: Vec<f64>) -> Result<Self> {
        let data = TwoArmData {
            experimental,
            reference,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        for (arm, values) in [("E", &self.experimental), ("R", &self.reference)] {
            if values.len() < 2 {
                return Err(Error::InsufficientData {
                    arm,
                    n: values.len(),
                    required: 2,
                });
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::domain(format!(
                    "arm {arm} contains non-finite value {v}"
                )));
            }
        }
        Ok(())
    }

    /// Parses `arm,value` CSV; `arm` is `E` or `R`, rows in any order.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "arm" || &headers[1] != "value" {
            return Err(Error::Parse(format!(
                "expected header `arm,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut experimental = Vec::new();
        let mut reference = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let row = line + 2;
            let value: f64 = record[1]
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: invalid value `{}`", &record[1])))?;
            match &record[0] {
                "E" => experimental.push(value),
                "R" => reference.push(value),
                other => {
                    return Err(Error::Parse(format!(
                        "row {row}: arm must be E or R, found `{other}`"
                    )))
                }
            }
        }
        TwoArmData::new(experimental, reference)
    }
}

/// `(x̄_E, x̄_R, s²)` with the arm sizes; `s²` is the pooled unbiased variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub xbar_e: f64,
    pub xbar_r: f64,
    pub s2: f64,
    pub n_e: usize,
    pub n_r: usize,
}

impl SufficientStats {
    pub fn diff(&self) -> f64 {
        self.xbar_e - self.xbar_r
    }

    /// Degrees of freedom of the pooled variance, `n_E + n_R - 2`.
    pub fn pooled_df(&self) -> usize {
        self.n_e + self.n_r - 2
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

pub fn sufficient_stats(data: &TwoArmData) -> Result<SufficientStats> {
    data.validate()?;
    let (e, r) = (&data.experimental, &data.reference);
    let xbar_e = mean(e);
    let xbar_r = mean(r);
    let s2 = (sum_sq_dev(e, xbar_e) + sum_sq_dev(r, xbar_r)) / (e.len() + r.len() - 2) as f64;
    Ok(SufficientStats {
        xbar_e,
        xbar_r,
        s2,
        n_e: e.len(),
        n_r: r.len(),
    })
}

/// Within-arm residuals: experimental arm first, then reference.
pub fn residuals(data: &TwoArmData) -> Result<Vec<f64>> {
    data.validate()?;
    let me = mean(&data.experimental);
    let mr = mean(&data.reference);
    Ok(data
        .experimental
        .iter()
        .map(|x| x - me)
        .chain(data.reference.iter().map(|x| x - mr))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical_quantile: f64,
    pub order_statistic: f64,
}

/// Normal QQ points with Blom plotting positions `(i - 3/8) / (n + 1/4)`.
pub fn qq_points(values: &[f64]) -> Result<Vec<QqPoint>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::domain(format!("QQ points need n >= 2, got {n}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, order_statistic)| {
            let p = (i as f64 + 1.0 - 0.375) / (n as f64 + 0.25);
            Ok(QqPoint {
                theoretical_quantile: std_normal_quantile(p)?,
                order_statistic,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqSeries {
    pub label: String,
    pub points: Vec<QqPoint>,
}

/// Residual QQ data for each arm and for the pooled residuals.
pub fn residual_qq_series(data: &TwoArmData) -> Result<Vec<QqSeries>> {
    let res = residuals(data)?;
    let (e, r) = res.split_at(data.experimental.len());
    Ok(vec![
        QqSeries {
            label: "experimental_residuals".into(),
            points: qq_points(e)?,
        },
        QqSeries {
            label: "reference_residuals".into(),
            points: qq_points(r)?,
        },
        QqSeries {
            label: "pooled_residuals".into(),
            points: qq_points(&res)?,
        },
    ])
}

/// Normality check of the two-arm model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheck {
    /// Shapiro-Wilk on the pooled within-arm residuals; this is the model check.
    pub residuals: ShapiroWilk,
    /// Shapiro-Wilk on the pooled raw responses, reported for reference only.
    pub raw_pooled: ShapiroWilk,
}

pub fn check_model(data: &TwoArmData) -> Result<ModelCheck> {
    let res = residuals(data)?;
    let raw: Vec<f64> = data
        .experimental
        .iter()
        .chain(&data.reference)
        .copied()
        .collect();
    Ok(ModelCheck {
        residuals: shapiro_wilk(&res)?,
        raw_pooled: shapiro_wilk(&raw)?,
    })
}
