//! Statistical checks of the generators: autocovariance tail exponents, the
//! agreement of the exact and truncated-MA routes, partial-sum variance
//! scaling, and embedding failure handling.

mod common;

use common::regression_slope;
use epochtest::dgp::{
    farima_autocovariance, generate, variance_growth_probe, CirculantSampler, DgpKind, DgpSpec,
    GenMode, PreparedDgp,
};
use epochtest::rng::stream_rng;

fn sample_acf(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    (0..=max_lag)
        .map(|h| {
            values[..n - h]
                .iter()
                .zip(&values[h..])
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Long-memory autocovariance decays like h^{2d-1}; check the log-log slope
/// of the sample ACF of one long path.
#[test]
fn farima_sample_acf_tail_exponent() {
    let d = 0.3;
    let spec = DgpSpec::new(DgpKind::Farima0d0 { d }, 100_000, 314);
    let series = generate(&spec).unwrap().series;
    let acf = sample_acf(series.values(), 200);
    let pts: Vec<(f64, f64)> = (10..=200)
        .filter(|&h| acf[h] > 0.0)
        .map(|h| ((h as f64).ln(), acf[h].ln()))
        .collect();
    assert!(pts.len() > 150, "too many nonpositive ACF values");
    let slope = regression_slope(&pts);
    assert!(
        (slope - (2.0 * d - 1.0)).abs() <= 0.1,
        "slope {slope} vs {}",
        2.0 * d - 1.0
    );
}

/// The embedding route and the truncated-MA route (M = 100 n) agree on the
/// ACF at small lags within Monte Carlo error, for positive and negative
/// memory.
#[test]
fn exact_and_truncated_ma_acf_agree() {
    let n = 512;
    let reps = 500;
    for (case, d) in [(0u64, 0.3f64), (1, -0.3)] {
        let mut exact_spec = DgpSpec::new(DgpKind::Farima0d0 { d }, n, 0);
        exact_spec.mode = GenMode::ExactGaussian;
        let mut ma_spec = exact_spec.clone();
        ma_spec.mode = GenMode::TruncatedMa;
        ma_spec.ma_truncation = Some(100 * n);

        let exact = PreparedDgp::prepare(&exact_spec).unwrap();
        let ma = PreparedDgp::prepare(&ma_spec).unwrap();

        let max_lag = 20;
        let mut acc = vec![(Vec::new(), Vec::new()); max_lag + 1];
        for rep in 0..reps {
            let se = exact.sample(&mut stream_rng(800 + case, &[0, rep]));
            let sm = ma.sample(&mut stream_rng(800 + case, &[1, rep]));
            let ae = sample_acf(&se, max_lag);
            let am = sample_acf(&sm, max_lag);
            for h in 0..=max_lag {
                acc[h].0.push(ae[h]);
                acc[h].1.push(am[h]);
            }
        }
        for (h, (es, ms)) in acc.iter().enumerate() {
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let var = |v: &[f64], m: f64| {
                v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
            };
            let (me, mm) = (mean(es), mean(ms));
            let pooled_se = ((var(es, me) + var(ms, mm)) / reps as f64).sqrt();
            assert!(
                (me - mm).abs() <= 3.0 * pooled_se + 1e-4,
                "d={d} lag {h}: exact {me} vs ma {mm} (se {pooled_se:e})"
            );
        }
    }
}

/// Ordinary random-walk increments: Var(S_n)/n is the innovation variance.
#[test]
fn variance_probe_iid_increments() {
    let rows = variance_growth_probe(0.0, &[1000, 10_000], 1000, 5150, 2).unwrap();
    for row in &rows {
        assert!(
            (row.ratio - 1.0).abs() <= 0.15,
            "n={}: ratio {}",
            row.n,
            row.ratio
        );
    }
}

/// Positive memory: Var(S_n) scales like n^{1+2d}; the normalized ratio is
/// flat across a decade.
#[test]
fn variance_probe_long_memory_plateau() {
    let rows = variance_growth_probe(0.3, &[1000, 10_000], 800, 6160, 2).unwrap();
    let ratio = rows[1].ratio / rows[0].ratio;
    assert!(
        (0.7..=1.4).contains(&ratio),
        "decade ratio {ratio} ({:?})",
        rows
    );
}

/// A covariance sequence that is not embeddable must be rejected, and the
/// full generator falls back to the MA route with a note in the metadata.
#[test]
fn embedding_failure_detected() {
    // gamma(0)=1, gamma(1)=-0.9: spectral density 1 - 1.8 cos(w) < 0 near 0
    let mut acov = vec![0.0; 70];
    acov[0] = 1.0;
    acov[1] = -0.9;
    assert!(CirculantSampler::new(64, &acov).is_err());
}

/// The boundary increment sequence embeds cleanly at the probe sizes.
#[test]
fn boundary_increment_embeds() {
    let acov = farima_autocovariance(-0.5, 1.0, 1024);
    assert!(CirculantSampler::new(1000, &acov).is_ok());
}
