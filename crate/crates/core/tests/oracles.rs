mod common;

use common::*;
use relbelief::bias::sample_cond_prior_predictive;
use relbelief::checks::{
    check_variance_prior, prior_predictive_means_logdensity, prior_predictive_v_logdensity,
    sample_prior_predictive_means, sample_prior_predictive_v, variance_check_score,
};
use relbelief::distributions::{
    gamma_cdf, gamma_quantile, sample_gamma, sample_normal, sample_truncated_normal,
    std_normal_pdf, student_t_cdf, student_t_quantile, RandomStream,
};
use relbelief::elicitation::Hyperparameters;
use relbelief::relative_belief::{
    exact_posterior_sampler, prior_difference_law, rb_table, DeltaGrid, DifferenceLaws, LawMode,
};
use relbelief::trial_data::SufficientStats;
use statrs::distribution::{Continuous, ContinuousCDF, FisherSnedecor, Gamma, StudentsT};

#[test]
fn student_t_cdf_matches_statrs() {
    for &df in &[1.0, 2.0, 3.5, 22.0, 150.0] {
        let oracle = StudentsT::new(0.0, 1.0, df).unwrap();
        for k in -40..=40 {
            let x = k as f64 * 0.25;
            let ours = student_t_cdf(x, df).unwrap();
            assert!((ours - oracle.cdf(x)).abs() < 1e-12, "df={df} x={x}");
        }
    }
}

#[test]
fn gamma_cdf_matches_statrs() {
    for &(shape, rate) in &[(0.5, 1.0), (1.0, 8.0), (2.2515, 4.8658), (30.0, 0.5)] {
        let oracle = Gamma::new(shape, rate).unwrap();
        for k in 1..200 {
            let x = k as f64 * 0.05 * shape / rate;
            let ours = gamma_cdf(x, shape, rate).unwrap();
            assert!((ours - oracle.cdf(x)).abs() < 1e-12, "shape={shape} x={x}");
        }
    }
}

#[test]
fn quantiles_invert_cdfs() {
    for &df in &[1.0, 2.0, 4.0, 22.0] {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let x = student_t_quantile(p, df).unwrap();
            assert!((student_t_cdf(x, df).unwrap() - p).abs() < 1e-12);
        }
    }
    for &(shape, rate) in &[(0.3, 1.0), (2.0, 5.0), (40.0, 3.0)] {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let x = gamma_quantile(p, shape, rate).unwrap();
            let back = gamma_cdf(x, shape, rate).unwrap();
            assert!(
                (back - p).abs() <= 1e-9 * p.min(1.0 - p),
                "p={p} shape={shape}"
            );
        }
    }
}

#[test]
fn variance_predictive_integrates_to_one() {
    for (hyper, k) in [
        (elicited_prior(), 22),
        (diffuse_prior(), 22),
        (diffuse_prior(), 4),
        (elicited_prior(), 2),
    ] {
        let total =
            integrate_positive(|v| prior_predictive_v_logdensity(v, &hyper, k).unwrap().exp());
        assert!((total - 1.0).abs() < 1e-4, "k={k}: {total}");
    }
}

#[test]
fn variance_predictive_is_scaled_f() {
    for hyper in [elicited_prior(), diffuse_prior()] {
        let k = 22;
        let c = k as f64 * hyper.beta0 / hyper.alpha0;
        let f = FisherSnedecor::new(k as f64, 2.0 * hyper.alpha0).unwrap();
        for v in [1.0, 10.0, 100.0] {
            let ours = prior_predictive_v_logdensity(v, &hyper, k).unwrap().exp();
            let oracle = f.pdf(v / c) / c;
            assert!(
                (ours - oracle).abs() <= 1e-9 * oracle,
                "v={v}: {ours} vs {oracle}"
            );
        }
    }
}

#[test]
fn means_predictive_integrates_to_one() {
    for hyper in [elicited_prior(), diffuse_prior()] {
        let (n_e, n_r) = (12, 7);
        let s = [
            (hyper.beta0 / hyper.alpha0 * (hyper.tau0_sq + 1.0 / n_e as f64)).sqrt(),
            (hyper.beta0 / hyper.alpha0 * (hyper.tau0_sq + 1.0 / n_r as f64)).sqrt(),
        ];
        let total = integrate_plane(
            |a, b| {
                prior_predictive_means_logdensity([a, b], &hyper, n_e, n_r)
                    .unwrap()
                    .exp()
            },
            [hyper.mu0, hyper.mu0],
            s,
            600,
        );
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }
}

/// Means density as the gamma mixture of normals, by quadrature over the precision.
fn mixture_means_density(u: [f64; 2], hyper: &Hyperparameters, n_e: usize, n_r: usize) -> f64 {
    let d1 = hyper.tau0_sq + 1.0 / n_e as f64;
    let d2 = hyper.tau0_sq + 1.0 / n_r as f64;
    let gamma = Gamma::new(hyper.alpha0, hyper.beta0).unwrap();
    simpson(
        |y| {
            let lam = y.exp();
            let z1 = (u[0] - hyper.mu0) * (lam / d1).sqrt();
            let z2 = (u[1] - hyper.mu0) * (lam / d2).sqrt();
            let normal = std_normal_pdf(z1) * std_normal_pdf(z2) * lam / (d1 * d2).sqrt();
            normal * gamma.pdf(lam) * lam
        },
        -30.0,
        12.0,
        20_000,
    )
}

#[test]
fn means_ranking_matches_mixture_construction() {
    let hyper = elicited_prior();
    let mut stream = RandomStream::new(404, 0);
    let draws: Vec<[f64; 2]> = (0..1000)
        .map(|_| sample_prior_predictive_means(&hyper, 12, 12, &mut stream).unwrap())
        .collect();
    let closed: Vec<f64> = draws
        .iter()
        .map(|&u| prior_predictive_means_logdensity(u, &hyper, 12, 12).unwrap())
        .collect();
    let mixture: Vec<f64> = draws
        .iter()
        .map(|&u| mixture_means_density(u, &hyper, 12, 12))
        .collect();
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        idx
    };
    assert_eq!(order(&closed), order(&mixture));
    for (c, m) in closed.iter().zip(&mixture) {
        assert!((c.exp() / m - 1.0).abs() < 1e-6);
    }
}

#[test]
fn root_v_weight_changes_rankings() {
    let hyper = elicited_prior();
    let k = 22;
    let vs: Vec<f64> = (1..400).map(|i| i as f64 * 5.0).collect();
    let swapped = vs.iter().any(|&a| {
        vs.iter().any(|&b| {
            let da = prior_predictive_v_logdensity(a, &hyper, k).unwrap();
            let db = prior_predictive_v_logdensity(b, &hyper, k).unwrap();
            let sa = variance_check_score(a, &hyper, k).unwrap();
            let sb = variance_check_score(b, &hyper, k).unwrap();
            da < db && sa > sb
        })
    });
    assert!(swapped);
}

#[test]
fn variance_pvalues_are_uniform_under_the_prior() {
    let hyper = elicited_prior();
    let k = 22;
    let mut stream = RandomStream::new(77, 0);
    let ps: Vec<f64> = (0..500)
        .map(|r| {
            let v = sample_prior_predictive_v(&hyper, k, &mut stream).unwrap();
            let stats = SufficientStats {
                xbar_e: 0.0,
                xbar_r: 0.0,
                s2: v / k as f64,
                n_e: 12,
                n_r: 12,
            };
            check_variance_prior(&hyper, &stats, 1000, 10_000 + r)
                .unwrap()
                .value()
        })
        .collect();
    let d = ks_uniform(ps);
    assert!(d < 0.08, "KS distance {d}");
}

fn derived_prior_draw(hyper: &Hyperparameters, stream: &mut RandomStream) -> f64 {
    let sigma2 = 1.0 / sample_gamma(stream, hyper.alpha0, hyper.beta0).unwrap();
    sample_normal(stream, 0.0, (2.0 * hyper.tau0_sq * sigma2).sqrt()).unwrap()
}

#[test]
fn derived_prior_law_matches_simulation() {
    let hyper = elicited_prior();
    let law = prior_difference_law(&hyper, LawMode::Derived).unwrap();
    let n = 1_000_000;
    let mut stream = RandomStream::new(2024, 0);
    let draws: Vec<f64> = (0..n)
        .map(|_| derived_prior_draw(&hyper, &mut stream))
        .collect();
    for (a, b) in [(-0.5, 0.5), (0.5, 1.5), (-4.0, -2.0), (3.0, f64::INFINITY)] {
        let p = law.interval_prob(a, b).unwrap();
        let hat = draws.iter().filter(|&&x| x > a && x <= b).count() as f64 / n as f64;
        assert!(
            (hat - p).abs() <= 3.0 * freq_se(p, n),
            "({a}, {b}]: {hat} vs {p}"
        );
    }
}

/// Per-bin frequencies of `draws` on the bins of `grid`.
fn histogram(draws: &[f64], grid: &DeltaGrid) -> Vec<f64> {
    let mut counts = vec![0usize; grid.len()];
    for &x in draws {
        let i = ((x / grid.delta - 1.0) / 2.0).ceil() as i64;
        let i = i.clamp(grid.i_min, grid.i_max);
        counts[(i - grid.i_min) as usize] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / draws.len() as f64)
        .collect()
}

#[test]
fn rb_table_matches_monte_carlo_histograms() {
    let hyper = elicited_prior();
    let stats = trial_stats();
    let laws = DifferenceLaws::new(&hyper, &stats, LawMode::Derived).unwrap();
    let grid = DeltaGrid::new(0.5, -12, 20).unwrap();
    let table = rb_table(&laws, &grid).unwrap();
    let n = 1_000_000;
    let mut prior_stream = RandomStream::new(5150, 0);
    let mut post_stream = RandomStream::new(5150, 1);
    let prior_draws: Vec<f64> = (0..n)
        .map(|_| derived_prior_draw(&hyper, &mut prior_stream))
        .collect();
    let post_draws: Vec<f64> = (0..n)
        .map(|_| exact_posterior_sampler(&hyper, &stats, &mut post_stream).unwrap())
        .collect();
    let prior_hat = histogram(&prior_draws, &grid);
    let post_hat = histogram(&post_draws, &grid);
    for (k, row) in table.rows.iter().enumerate() {
        let (p, q) = (row.prior_mass, row.posterior_mass);
        assert!(
            (prior_hat[k] - p).abs() <= 3.0 * freq_se(p, n),
            "prior bin {}",
            row.bin_index
        );
        assert!(
            (post_hat[k] - q).abs() <= 3.0 * freq_se(q, n),
            "posterior bin {}",
            row.bin_index
        );
        if p > 1e-3 && q > 1e-3 {
            let rb_hat = post_hat[k] / prior_hat[k];
            let se = row.rb * ((1.0 - q) / (n as f64 * q) + (1.0 - p) / (n as f64 * p)).sqrt();
            assert!(
                (rb_hat - row.rb).abs() <= 3.0 * se,
                "rb bin {}: {rb_hat} vs {}",
                row.bin_index,
                row.rb
            );
        }
    }
}

#[test]
fn posterior_sampler_mean_is_shrunken_difference() {
    let hyper = elicited_prior();
    let s = trial_stats();
    let n = 1_000_000;
    let mut stream = RandomStream::new(31, 0);
    let draws: Vec<f64> = (0..n)
        .map(|_| exact_posterior_sampler(&hyper, &s, &mut stream).unwrap())
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let shrink = |xbar: f64, m: usize| {
        (m as f64 * xbar + hyper.mu0 / hyper.tau0_sq) / (m as f64 + 1.0 / hyper.tau0_sq)
    };
    let expected = shrink(s.xbar_e, s.n_e) - shrink(s.xbar_r, s.n_r);
    assert!(
        (mean - expected).abs() <= 3.0 * (var / n as f64).sqrt(),
        "{mean} vs {expected}"
    );
}

#[test]
fn diffuse_sampler_matches_mixture_law_not_literal() {
    let hyper = Hyperparameters::new(0.0, 1e6, 1.0, 8.0).unwrap();
    let s = trial_stats();
    let derived = DifferenceLaws::new(&hyper, &s, LawMode::Derived)
        .unwrap()
        .posterior;
    let literal = DifferenceLaws::new(&hyper, &s, LawMode::PaperLiteral)
        .unwrap()
        .posterior;
    let n = 1_000_000;
    let mut stream = RandomStream::new(99, 3);
    let draws: Vec<f64> = (0..n)
        .map(|_| exact_posterior_sampler(&hyper, &s, &mut stream).unwrap())
        .collect();
    let mut largest_gap: f64 = 0.0;
    for k in -6..=14 {
        let (a, b) = ((2 * k - 1) as f64 * 0.5, (2 * k + 1) as f64 * 0.5);
        let p = derived.interval_prob(a, b).unwrap();
        let hat = draws.iter().filter(|&&x| x > a && x <= b).count() as f64 / n as f64;
        assert!(
            (hat - p).abs() <= 3.0 * freq_se(p, n),
            "bin {k}: {hat} vs {p}"
        );
        largest_gap = largest_gap.max((literal.interval_prob(a, b).unwrap() - p).abs());
    }
    assert!(largest_gap > 1e-3, "{largest_gap}");
}

#[test]
fn truncated_normal_matches_rejection() {
    let (mean, sd, lo, hi) = (0.0, 1.3, 0.5, 1.5);
    let sub = 10;
    let width = (hi - lo) / sub as f64;
    let slot = |x: f64| (((x - lo) / width).ceil() as usize).clamp(1, sub) - 1;

    let n_inv = 1_000_000;
    let mut stream = RandomStream::new(8, 0);
    let mut inv = vec![0usize; sub];
    for _ in 0..n_inv {
        let x = sample_truncated_normal(&mut stream, mean, sd, lo, hi).unwrap();
        assert!(x > lo && x <= hi);
        inv[slot(x)] += 1;
    }

    let n_rej = 10_000_000;
    let mut stream = RandomStream::new(8, 1);
    let mut rej = vec![0usize; sub];
    let mut accepted = 0;
    while accepted < n_rej {
        let x = sample_normal(&mut stream, mean, sd).unwrap();
        if x > lo && x <= hi {
            rej[slot(x)] += 1;
            accepted += 1;
        }
    }
    for j in 0..sub {
        let p1 = inv[j] as f64 / n_inv as f64;
        let p2 = rej[j] as f64 / n_rej as f64;
        let se = (freq_se(p1, n_inv).powi(2) + freq_se(p2, n_rej).powi(2)).sqrt();
        assert!((p1 - p2).abs() <= 3.0 * se, "slot {j}: {p1} vs {p2}");
    }
}

#[test]
fn conditional_predictive_moments() {
    let (diff, sigma2, n_e, n_r) = (0.7, 9.0, 12, 15);
    let n = 100_000;
    let mut stream = RandomStream::new(13, 0);
    let draws: Vec<(f64, f64)> = (0..n)
        .map(|_| sample_cond_prior_predictive(diff, sigma2, n_e, n_r, &mut stream).unwrap())
        .collect();
    let nf = n as f64;
    let md = draws.iter().map(|d| d.0).sum::<f64>() / nf;
    let ms = draws.iter().map(|d| d.1).sum::<f64>() / nf;
    let vd = draws.iter().map(|d| (d.0 - md).powi(2)).sum::<f64>() / nf;
    let vs = draws.iter().map(|d| (d.1 - ms).powi(2)).sum::<f64>() / nf;
    let cov = draws.iter().map(|d| (d.0 - md) * (d.1 - ms)).sum::<f64>() / nf;
    assert!((md - diff).abs() <= 3.0 * (vd / nf).sqrt());
    assert!((ms - sigma2).abs() <= 3.0 * (vs / nf).sqrt());
    assert!((cov / (vd * vs).sqrt()).abs() <= 3.0 / nf.sqrt());
    let expected_var = (1.0 / n_e as f64 + 1.0 / n_r as f64) * sigma2;
    assert!((vd / expected_var - 1.0).abs() < 0.02);
}
