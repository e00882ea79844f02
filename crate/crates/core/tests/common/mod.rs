//! Shared test oracles, independent of the implementation paths they check:
//! plain Monte Carlo integration over the unit square, closed-form
//! chi-squared CDFs, and small statistics helpers.

// each test binary compiles its own copy and uses a subset
#![allow(dead_code)]

use epochtest::par::par_map;
use epochtest::rng::stream_rng;
use rand::Rng;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Trigonometric factor of a covariance-entry integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, freq: usize, x: f64) -> f64 {
        match self {
            Trig::Cos => (TWO_PI * freq as f64 * x).cos(),
            Trig::Sin => (TWO_PI * freq as f64 * x).sin(),
        }
    }
}

/// Monte Carlo estimate and standard error of
/// `integral of f(i x) g(j y) kernel(|x-y|) over [0,1]^2`
/// from `points` uniform samples.
pub fn mc_pair_integral(
    trig: Trig,
    i: usize,
    j: usize,
    kernel: impl Fn(f64) -> f64 + Sync,
    points: usize,
    seed: u64,
    threads: usize,
) -> (f64, f64) {
    let chunks = 64;
    let per_chunk = points / chunks;
    let partials = par_map(chunks, threads, |c| {
        let mut rng = stream_rng(seed, &[c as u64]);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..per_chunk {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            let v = trig.eval(i, x) * trig.eval(j, y) * kernel((x - y).abs());
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let n = (per_chunk * chunks) as f64;
    let total: f64 = partials.iter().map(|p| p.0).sum();
    let total_sq: f64 = partials.iter().map(|p| p.1).sum();
    let mean = total / n;
    let var = (total_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate and standard error of the stationary-regime
/// correction term `1 - (2d+1) integral of x^{2d}(cos 2 pi i x + cos 2 pi j x)`,
/// by importance sampling with density `(2d+1) x^{2d}` (keeps the variance
/// finite for d < -1/4 where the plain estimator would have none).
pub fn mc_a_term(
    d: f64,
    i: usize,
    j: usize,
    points: usize,
    seed: u64,
    threads: usize,
) -> (f64, f64) {
    assert!(d > -0.5 && d < 0.5);
    let chunks = 64;
    let per_chunk = points / chunks;
    let inv_exp = 1.0 / (2.0 * d + 1.0);
    let partials = par_map(chunks, threads, |c| {
        let mut rng = stream_rng(seed, &[c as u64]);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..per_chunk {
            let u: f64 = rng.random();
            let x = u.powf(inv_exp);
            let v = (TWO_PI * i as f64 * x).cos() + (TWO_PI * j as f64 * x).cos();
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let n = (per_chunk * chunks) as f64;
    let total: f64 = partials.iter().map(|p| p.0).sum();
    let total_sq: f64 = partials.iter().map(|p| p.1).sum();
    let mean = total / n;
    let var = (total_sq / n - mean * mean).max(0.0);
    (1.0 - mean, (var / n).sqrt())
}

/// Full-entry Monte Carlo oracle for one covariance entry, mirroring the
/// displayed regime formulas entirely through sampling. Returns the
/// estimate and its standard error.
pub fn mc_sigma_entry(
    block: Trig,
    d: f64,
    i: usize,
    j: usize,
    points: usize,
    seed: u64,
    threads: usize,
) -> (f64, f64) {
    let pi_sq = std::f64::consts::PI * std::f64::consts::PI;
    if d == 0.5 {
        let (v, se) = mc_pair_integral(block, i, j, |u| -(u.ln()), points, seed, threads);
        (0.5 * v, 0.5 * se)
    } else if d > 0.5 {
        let beta = 2.0 * d - 1.0;
        let (v, se) = mc_pair_integral(block, i, j, |u| u.powf(beta), points, seed, threads);
        (-0.5 * v, 0.5 * se)
    } else {
        let beta = 2.0 * d + 1.0;
        let factor = 2.0 * pi_sq * (i * j) as f64;
        match block {
            Trig::Cos => {
                let (dbl, dbl_se) =
                    mc_pair_integral(Trig::Sin, i, j, |u| u.powf(beta), points, seed, threads);
                let (a, a_se) = mc_a_term(d, i, j, points, seed ^ 0xa5a5, threads);
                let value = -(a + factor * dbl);
                let se = (a_se * a_se + (factor * dbl_se) * (factor * dbl_se)).sqrt();
                (value, se)
            }
            Trig::Sin => {
                let (dbl, dbl_se) =
                    mc_pair_integral(Trig::Cos, i, j, |u| u.powf(beta), points, seed, threads);
                (-factor * dbl, factor * dbl_se)
            }
        }
    }
}

/// chi-squared CDF for the small even/odd degrees used as oracles.
pub fn chi2_cdf(df: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    match df {
        1 => 2.0 * normal_cdf(x.sqrt()) - 1.0,
        2 => 1.0 - (-x / 2.0).exp(),
        4 => 1.0 - (-x / 2.0).exp() * (1.0 + x / 2.0),
        _ => panic!("unsupported df {df}"),
    }
}

/// Standard normal CDF via erf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// One-sample KS distance between a sample and CDF values evaluated at the
/// sorted sample points.
pub fn ks_one_sample(sorted: &[f64], cdf_at_sorted: &[f64]) -> f64 {
    assert_eq!(sorted.len(), cdf_at_sorted.len());
    let n = sorted.len() as f64;
    let mut ks = 0.0f64;
    for (idx, &f) in cdf_at_sorted.iter().enumerate() {
        ks = ks.max(f - idx as f64 / n);
        ks = ks.max((idx + 1) as f64 / n - f);
    }
    ks
}

/// Least-squares slope of y on x.
pub fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}
