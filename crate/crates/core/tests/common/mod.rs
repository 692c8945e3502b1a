#![allow(dead_code)]

use relbelief::elicitation::Hyperparameters;
use relbelief::trial_data::{sufficient_stats, SufficientStats, TwoArmData};

pub const TRIAL_E: [f64; 12] = [
    3.3, 17.7, 6.7, 11.1, -5.8, 6.9, 5.8, 3.0, 6.0, 3.5, 18.7, 9.6,
];
pub const TRIAL_R: [f64; 12] = [
    10.3, 11.3, 2.0, -6.1, 6.2, 6.8, 3.7, -3.3, -3.6, -3.5, 13.7, 12.6,
];

pub fn trial() -> TwoArmData {
    TwoArmData::new(TRIAL_E.to_vec(), TRIAL_R.to_vec()).unwrap()
}

pub fn trial_stats() -> SufficientStats {
    sufficient_stats(&trial()).unwrap()
}

pub fn diffuse_prior() -> Hyperparameters {
    Hyperparameters::new(0.0, 10.0, 2.0, 5.0).unwrap()
}

pub fn elicited_prior() -> Hyperparameters {
    Hyperparameters::new(0.0, 0.67, 1.0, 8.0).unwrap()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Integral of `f` over `(0, ∞)` through `v = e^y`.
pub fn integrate_positive(f: impl Fn(f64) -> f64) -> f64 {
    simpson(
        |y| {
            let v = y.exp();
            f(v) * v
        },
        -60.0,
        60.0,
        40_000,
    )
}

/// Integral of `f` over the plane through `x_i = c_i + s_i tan(t_i)`.
pub fn integrate_plane(f: impl Fn(f64, f64) -> f64, c: [f64; 2], s: [f64; 2], n: usize) -> f64 {
    let half = std::f64::consts::FRAC_PI_2 - 1e-9;
    simpson(
        |t1| {
            let sec1 = 1.0 / t1.cos();
            let x1 = c[0] + s[0] * t1.tan();
            simpson(
                |t2| {
                    let sec2 = 1.0 / t2.cos();
                    f(x1, c[1] + s[1] * t2.tan()) * s[1] * sec2 * sec2
                },
                -half,
                half,
                n,
            ) * s[0]
                * sec1
                * sec1
        },
        -half,
        half,
        n,
    )
}

/// Standard error of a Monte Carlo frequency.
pub fn freq_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Kolmogorov-Smirnov distance of a sample from the uniform law on (0, 1).
pub fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}
