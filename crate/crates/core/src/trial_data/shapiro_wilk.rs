// Shapiro-Wilk W test with Royston's (1995) approximation to the null
// distribution of W (Applied Statistics algorithm AS R94), valid for
// 3 <= n <= 5000.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::distributions::{std_normal_quantile, std_normal_sf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

pub fn shapiro_wilk(values: &[f64]) -> Result<ShapiroWilk> {
    let n = values.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::domain(format!(
            "Shapiro-Wilk requires 3 <= n <= 5000, got n = {n}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(
            "Shapiro-Wilk input contains non-finite values",
        ));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(Error::Degenerate(
            "Shapiro-Wilk input has zero sample variance".into(),
        ));
    }

    let a = coefficients(n)?;
    let mean = x.iter().sum::<f64>() / n as f64;
    // scale by the range to keep sums well conditioned
    let ss: f64 = x.iter().map(|v| ((v - mean) / range).powi(2)).sum();
    let b: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * (x[n - 1 - i] - x[i]) / range)
        .sum();
    let w = (b * b / ss).clamp(0.0, 1.0);

    Ok(ShapiroWilk {
        w_statistic: w,
        p_value: p_value(w, n)?,
        n,
    })
}

/// Coefficients `a_1..a_{n/2}` for the upper half of the order statistics.
fn coefficients(n: usize) -> Result<Vec<f64>> {
    let half = n / 2;
    if n == 3 {
        return Ok(vec![FRAC_1_SQRT_2]);
    }
    let an = n as f64;
    let m: Vec<f64> = (1..=half)
        .map(|i| std_normal_quantile((i as f64 - 0.375) / (an + 0.25)))
        .collect::<Result<_>>()?;
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let mut a = vec![0.0; half];
    let first_scaled;
    let fac;
    if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[1] = a2;
        first_scaled = 2;
    } else {
        fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        first_scaled = 1;
    }
    a[0] = a1;
    for i in first_scaled..half {
        a[i] = -m[i] / fac;
    }
    Ok(a)
}

fn p_value(w: f64, n: usize) -> Result<f64> {
    let an = n as f64;
    if n == 3 {
        use std::f64::consts::{FRAC_PI_3, PI};
        return Ok((6.0 / PI * (w.sqrt().asin() - FRAC_PI_3)).clamp(0.0, 1.0));
    }
    let w1 = (1.0 - w).ln();
    let (y, m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if w1 >= gamma {
            return Ok(1e-99);
        }
        (-(gamma - w1).ln(), poly(&C3, an), poly(&C4, an).exp())
    } else {
        let ln_n = an.ln();
        (w1, poly(&C5, ln_n), poly(&C6, ln_n).exp())
    };
    Ok(std_normal_sf((y - m) / s))
}
