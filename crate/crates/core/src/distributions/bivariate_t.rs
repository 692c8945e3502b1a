use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::ln_gamma;
use crate::{Error, Result};

/// Diagonal 2x2 scale matrix `diag(d1, d2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalScale {
    pub d1: f64,
    pub d2: f64,
}

impl DiagonalScale {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        if d1 > 0.0 && d2 > 0.0 && d1.is_finite() && d2.is_finite() {
            Ok(DiagonalScale { d1, d2 })
        } else {
            Err(Error::domain(format!(
                "scale matrix must be positive definite, got diag({d1}, {d2})"
            )))
        }
    }

    /// `(u - mean)' S^{-1} (u - mean)`.
    pub fn mahalanobis_sq(&self, u: [f64; 2], mean: [f64; 2]) -> f64 {
        let a = u[0] - mean[0];
        let b = u[1] - mean[1];
        a * a / self.d1 + b * b / self.d2
    }
}

/// Log density of the bivariate Student t `t_df(2, mean, scale)`.
///
/// With `df = 2 alpha0` and `scale = (beta0 / alpha0) Sigma` this is the
/// prior predictive density of the arm means under the normal-gamma prior.
pub fn bivariate_t_logpdf(
    u: [f64; 2],
    df: f64,
    mean: [f64; 2],
    scale: DiagonalScale,
) -> Result<f64> {
    if !(df > 0.0 && df.is_finite()) {
        return Err(Error::domain(format!("df must be positive, got {df}")));
    }
    // re-validate: the fields are public
    let scale = DiagonalScale::new(scale.d1, scale.d2)?;
    let q = scale.mahalanobis_sq(u, mean);
    Ok(ln_gamma(0.5 * df + 1.0)
        - ln_gamma(0.5 * df)
        - (df * PI).ln()
        - 0.5 * (scale.d1 * scale.d2).ln()
        - (0.5 * df + 1.0) * (q / df).ln_1p())
}
