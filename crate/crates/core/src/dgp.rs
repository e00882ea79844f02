//! Synthetic generators: white noise, AR(1), fractionally differenced noise,
//! and its integrated (unit-root) variant.
//!
//! The default route for fractional noise is circulant embedding of the
//! exact autocovariance (exact second-order structure for Gaussian
//! innovations, O(n log n)); a truncated moving-average filter is available
//! both as an alternative mode and as the automatic fallback if the
//! embedding produces negative eigenvalues.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{convolve, fft, next_pow2, Complex};
use crate::model::TimeSeries;
use crate::rng::stream_rng;

/// Process family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpKind {
    WhiteNoise,
    Farima0d0 {
        d: f64,
    },
    Ar1 {
        phi: f64,
    },
    /// Cumulative sum of a fractional-noise path; the output is I(1) with
    /// memory parameter `d_increment + 1`.
    IntegratedFarima {
        d_increment: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GenMode {
    #[default]
    ExactGaussian,
    TruncatedMa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Innovations {
    #[default]
    Gaussian,
    /// Centered uniform scaled to the requested variance; exercises the
    /// finite-fourth-moment assumption away from Gaussianity.
    CenteredUniform,
}

fn default_sigma() -> f64 {
    1.0
}

/// Full description of a generated series; identical specs (including seed
/// and mode) produce identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    #[serde(flatten)]
    pub kind: DgpKind,
    pub n: usize,
    #[serde(default = "default_sigma")]
    pub sigma_eps: f64,
    #[serde(default)]
    pub seed: u64,
    /// MA truncation length for `TruncatedMa`; default max(10^4, 10n).
    #[serde(default)]
    pub ma_truncation: Option<usize>,
    #[serde(default)]
    pub mode: GenMode,
    #[serde(default)]
    pub innovations: Innovations,
}

impl DgpSpec {
    pub fn new(kind: DgpKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            sigma_eps: 1.0,
            seed,
            ma_truncation: None,
            mode: GenMode::default(),
            innovations: Innovations::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::DgpSpecError { reason });
        if self.n < 2 {
            return fail(format!("n = {} is too short", self.n));
        }
        if !(self.sigma_eps > 0.0 && self.sigma_eps.is_finite()) {
            return fail(format!("sigma_eps = {} must be positive", self.sigma_eps));
        }
        match self.kind {
            DgpKind::Farima0d0 { d } => {
                if !(d > -0.5 && d < 0.5) {
                    return fail(format!("farima requires d in (-1/2, 1/2), got {d}"));
                }
            }
            DgpKind::Ar1 { phi } => {
                if !(phi.abs() < 1.0) {
                    return fail(format!("ar1 requires |phi| < 1, got {phi}"));
                }
            }
            DgpKind::IntegratedFarima { d_increment } => {
                if !(-0.5..0.5).contains(&d_increment) {
                    return fail(format!(
                        "integrated farima requires d_increment in [-1/2, 1/2), got {d_increment}"
                    ));
                }
            }
            DgpKind::WhiteNoise => {}
        }
        if self.innovations == Innovations::CenteredUniform && self.uses_embedding() {
            return fail(
                "centered-uniform innovations require the truncated_ma mode (the embedding \
                 route is Gaussian by construction)"
                    .to_string(),
            );
        }
        Ok(())
    }

    fn uses_embedding(&self) -> bool {
        matches!(
            self.kind,
            DgpKind::Farima0d0 { .. } | DgpKind::IntegratedFarima { .. }
        ) && self.mode == GenMode::ExactGaussian
    }

    /// Memory parameter of the generated process.
    pub fn memory_parameter(&self) -> f64 {
        match self.kind {
            DgpKind::WhiteNoise | DgpKind::Ar1 { .. } => 0.0,
            DgpKind::Farima0d0 { d } => d,
            DgpKind::IntegratedFarima { d_increment } => d_increment + 1.0,
        }
    }

    pub fn default_ma_truncation(&self) -> usize {
        self.ma_truncation
            .unwrap_or_else(|| 10_000.max(10 * self.n))
    }
}

/// Fractional-differencing moving-average weights `a_0..a_m`, from the
/// ratio recursion `a_j = a_{j-1} (j - 1 + d) / j`.
pub fn farima_coefficients(d: f64, m: usize) -> Vec<f64> {
    assert!((-0.5..0.5).contains(&d), "d out of range");
    assert!(m >= 1);
    let mut a = Vec::with_capacity(m + 1);
    a.push(1.0);
    for j in 1..=m {
        let prev = a[j - 1];
        a.push(prev * (j as f64 - 1.0 + d) / j as f64);
    }
    a
}

/// Autocovariance `gamma(0..=max_lag)` of fractional noise:
/// `gamma(0) = sigma^2 Gamma(1-2d) / Gamma(1-d)^2`, then the ratio
/// recursion `gamma(h+1) = gamma(h) (h + d) / (h + 1 - d)`.
pub fn farima_autocovariance(d: f64, sigma_eps: f64, max_lag: usize) -> Vec<f64> {
    assert!((-0.5..0.5).contains(&d), "d out of range");
    let gamma0 =
        sigma_eps * sigma_eps * libm::tgamma(1.0 - 2.0 * d) / libm::tgamma(1.0 - d).powi(2);
    let mut acov = Vec::with_capacity(max_lag + 1);
    acov.push(gamma0);
    for h in 0..max_lag {
        let prev = acov[h];
        acov.push(prev * (h as f64 + d) / (h as f64 + 1.0 - d));
    }
    acov
}

/// Exact Gaussian sampler for a stationary series with the given
/// autocovariance, by circulant embedding. The eigen-decomposition is done
/// once at construction so replicated sampling is cheap.
#[derive(Debug, Clone)]
pub struct CirculantSampler {
    n: usize,
    half: usize,
    /// per-frequency amplitudes, already divided for the synthesis step
    amp: Vec<f64>,
}

impl CirculantSampler {
    /// Build from `gamma(0..=half)` where `half = next_pow2(n)`.
    pub fn new(n: usize, acov: &[f64]) -> Result<Self> {
        let half = next_pow2(n.max(2));
        assert!(acov.len() > half, "need gamma up to lag {half}");
        let size = 2 * half;
        let mut row = vec![Complex::ZERO; size];
        for k in 0..=half {
            row[k].re = acov[k];
        }
        for k in 1..half {
            row[size - k].re = acov[k];
        }
        fft(&mut row);
        let eigen: Vec<f64> = row.iter().map(|c| c.re).collect();
        let max = eigen.iter().cloned().fold(0.0f64, f64::max);
        let min = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-8 * max {
            return Err(Error::EmbeddingFailure {
                min_eigenvalue: min,
            });
        }
        let amp = eigen
            .iter()
            .enumerate()
            .map(|(k, &lambda)| {
                let lambda = lambda.max(0.0);
                if k == 0 || k == half {
                    (lambda / size as f64).sqrt()
                } else {
                    (lambda / (2.0 * size as f64)).sqrt()
                }
            })
            .collect();
        Ok(Self { n, half, amp })
    }

    /// One exact draw of length n.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let size = 2 * self.half;
        let mut w = vec![Complex::ZERO; size];
        let z = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
        w[0] = Complex::new(self.amp[0] * z(rng), 0.0);
        for k in 1..self.half {
            let re = self.amp[k] * z(rng);
            let im = self.amp[k] * z(rng);
            w[k] = Complex::new(re, im);
            w[size - k] = w[k].conj();
        }
        w[self.half] = Complex::new(self.amp[self.half] * z(rng), 0.0);
        fft(&mut w);
        w[..self.n].iter().map(|c| c.re).collect()
    }
}

/// A spec compiled for repeated sampling; experiments prepare once per grid
/// point and draw one replicate per derived stream.
#[derive(Debug, Clone)]
pub struct PreparedDgp {
    spec: DgpSpec,
    route: Route,
    embedding_fallback: bool,
}

#[derive(Debug, Clone)]
enum Route {
    WhiteNoise,
    Ar1 {
        phi: f64,
        burn_in: usize,
    },
    /// exact Gaussian fractional noise (optionally integrated afterwards)
    Embedded {
        sampler: CirculantSampler,
        integrate: bool,
    },
    /// truncated MA filter (optionally integrated afterwards)
    Filtered {
        coeffs: Vec<f64>,
        integrate: bool,
    },
}

/// Generation metadata reported alongside the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub mode_used: GenMode,
    pub embedding_fallback: bool,
    pub ma_truncation_used: Option<usize>,
    pub innovations: Innovations,
}

impl PreparedDgp {
    pub fn prepare(spec: &DgpSpec) -> Result<Self> {
        spec.validate()?;
        let (fractional_d, integrate) = match spec.kind {
            DgpKind::Farima0d0 { d } => (Some(d), false),
            DgpKind::IntegratedFarima { d_increment } => (Some(d_increment), true),
            _ => (None, false),
        };
        let route = match spec.kind {
            DgpKind::WhiteNoise => Route::WhiteNoise,
            DgpKind::Ar1 { phi } => Route::Ar1 {
                phi,
                // a memoryless recursion needs no burn-in, and skipping it
                // keeps phi = 0 draw-for-draw identical to white noise
                burn_in: if phi == 0.0 {
                    0
                } else {
                    (10.0 / (1.0 - phi.abs())).ceil() as usize
                },
            },
            _ => {
                let d = fractional_d.expect("fractional kind");
                match spec.mode {
                    GenMode::ExactGaussian => {
                        let half = next_pow2(spec.n.max(2));
                        let acov = farima_autocovariance(d, spec.sigma_eps, half);
                        match CirculantSampler::new(spec.n, &acov) {
                            Ok(sampler) => Route::Embedded { sampler, integrate },
                            Err(Error::EmbeddingFailure { .. }) => {
                                // documented fallback route
                                return Ok(Self {
                                    spec: spec.clone(),
                                    route: Route::Filtered {
                                        coeffs: farima_coefficients(
                                            d,
                                            spec.default_ma_truncation(),
                                        ),
                                        integrate,
                                    },
                                    embedding_fallback: true,
                                });
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    GenMode::TruncatedMa => Route::Filtered {
                        coeffs: farima_coefficients(d, spec.default_ma_truncation()),
                        integrate,
                    },
                }
            }
        };
        Ok(Self {
            spec: spec.clone(),
            route,
            embedding_fallback: false,
        })
    }

    pub fn meta(&self) -> GenMeta {
        GenMeta {
            mode_used: match self.route {
                Route::Filtered { .. } => GenMode::TruncatedMa,
                _ => self.spec.mode,
            },
            embedding_fallback: self.embedding_fallback,
            ma_truncation_used: match &self.route {
                Route::Filtered { coeffs, .. } => Some(coeffs.len() - 1),
                _ => None,
            },
            innovations: self.spec.innovations,
        }
    }

    fn innovation<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.spec.innovations {
            Innovations::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                self.spec.sigma_eps * z
            }
            Innovations::CenteredUniform => {
                let u: f64 = rng.random();
                self.spec.sigma_eps * 12f64.sqrt() * (u - 0.5)
            }
        }
    }

    /// One replicate. Deterministic for a given generator state.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.spec.n;
        let mut series = match &self.route {
            Route::WhiteNoise => (0..n).map(|_| self.innovation(rng)).collect(),
            Route::Ar1 { phi, burn_in } => {
                let mut x = 0.0;
                for _ in 0..*burn_in {
                    x = phi * x + self.innovation(rng);
                }
                (0..n)
                    .map(|_| {
                        x = phi * x + self.innovation(rng);
                        x
                    })
                    .collect()
            }
            Route::Embedded { sampler, .. } => sampler.sample(rng),
            Route::Filtered { coeffs, .. } => {
                let m = coeffs.len() - 1;
                let eps: Vec<f64> = (0..n + m).map(|_| self.innovation(rng)).collect();
                let conv = convolve(coeffs, &eps);
                conv[m..m + n].to_vec()
            }
        };
        let integrate = matches!(
            &self.route,
            Route::Embedded {
                integrate: true,
                ..
            } | Route::Filtered {
                integrate: true,
                ..
            }
        );
        if integrate {
            let mut acc = 0.0;
            for v in series.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        series
    }
}

/// Generated series plus the metadata describing how it was produced.
#[derive(Debug, Clone)]
pub struct Generated {
    pub series: TimeSeries,
    pub meta: GenMeta,
}

/// Generate a series from a spec; deterministic per seed.
pub fn generate(spec: &DgpSpec) -> Result<Generated> {
    let prepared = PreparedDgp::prepare(spec)?;
    let mut rng = stream_rng(spec.seed, &[]);
    let series = TimeSeries::new(prepared.sample(&mut rng))?;
    Ok(Generated {
        series,
        meta: prepared.meta(),
    })
}

/// One row of the partial-sum variance probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: usize,
    pub variance: f64,
    /// `variance / log n` at the boundary increment d = -1/2, otherwise
    /// `variance / n^{1+2d}`.
    pub ratio: f64,
}

/// Estimate Var(S_n) of the partial sums of a fractional-noise path over a
/// grid of lengths, by replication. At `d_increment = -1/2` the normalized
/// ratio should flatten against log n; for larger d against `n^{1+2d}`.
pub fn variance_growth_probe(
    d_increment: f64,
    n_grid: &[usize],
    replications: usize,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<ProbeRow>> {
    assert!(replications >= 2);
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let spec = DgpSpec::new(DgpKind::IntegratedFarima { d_increment }, n, 0);
        let prepared = PreparedDgp::prepare(&spec)?;
        let sums = crate::par::par_map(replications, threads, |rep| {
            let mut rng = stream_rng(master_seed, &[gi as u64, rep as u64]);
            // the integrated path's last point is S_n
            *prepared.sample(&mut rng).last().expect("nonempty")
        });
        let mean = sums.iter().sum::<f64>() / replications as f64;
        let variance =
            sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (replications - 1) as f64;
        let normalizer = if d_increment == -0.5 {
            (n as f64).ln()
        } else {
            (n as f64).powf(1.0 + 2.0 * d_increment)
        };
        rows.push(ProbeRow {
            n,
            variance,
            ratio: variance / normalizer,
        });
    }
    Ok(rows)
}
