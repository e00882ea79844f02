//! Shared domain types: the sample, the epoch partition, the memory
//! parameter, and the test configuration.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// An ordered sample of finite real values.
///
/// Construction rejects NaN and infinities and requires at least two points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                n: values.len(),
                min: 2,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Map every value through `f`, keeping the series contract.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Partition of the first `m * ell` points into `m` consecutive blocks of
/// length `ell`. Block `h` (0-based) covers indices `h*ell .. (h+1)*ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochPartition {
    ell: usize,
    m: usize,
}

impl EpochPartition {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn num_blocks(&self) -> usize {
        self.m
    }

    /// Number of points actually used, `m * ell`.
    pub fn usable_n(&self) -> usize {
        self.m * self.ell
    }

    /// Index range of block `h` (0-based).
    pub fn block_range(&self, h: usize) -> std::ops::Range<usize> {
        debug_assert!(h < self.m);
        h * self.ell..(h + 1) * self.ell
    }
}

/// Split a series into `floor(n / ell)` blocks of length `ell`.
///
/// When `ell` does not divide `n`, the trailing `n mod ell` points are
/// excluded; both the full-series and block periodograms are later computed
/// on the truncated length so numerator and denominator refer to the same
/// data.
pub fn make_partition(series: &TimeSeries, ell: usize) -> Result<EpochPartition> {
    if ell < 2 {
        return Err(Error::InvalidLength { ell });
    }
    let n = series.len();
    let m = n / ell;
    if m < 2 {
        return Err(Error::BlockTooLong { n, ell });
    }
    Ok(EpochPartition { ell, m })
}

/// Memory parameter in the open interval (-1/2, 3/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryParameter {
    d: f64,
}

/// Memory regime implied by the parameter: stationary below 1/2, integrated
/// at or above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryRegime {
    I0,
    I1,
}

impl MemoryParameter {
    pub fn new(d: f64) -> Result<Self> {
        if !(d > -0.5 && d < 1.5) {
            return Err(Error::MemoryParamOutOfRange { d });
        }
        Ok(Self { d })
    }

    pub fn value(&self) -> f64 {
        self.d
    }

    pub fn regime(&self) -> MemoryRegime {
        if self.d < 0.5 {
            MemoryRegime::I0
        } else {
            MemoryRegime::I1
        }
    }

    /// The boundary value d = 1/2 used by the parameter-free test.
    pub fn boundary() -> Self {
        Self { d: 0.5 }
    }
}

/// Configuration of the test procedure.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TestConfig {
    /// Number of Fourier frequencies entering the statistic.
    pub s: usize,
    /// Nominal level of the one-sided test.
    pub alpha: f64,
    /// Block (epoch) length.
    pub ell: usize,
    /// Set when `ell` came from the small-sample heuristic rather than the
    /// standard choice; echoed in the outcome.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ell_heuristic: bool,
    /// Memory parameter used in the normalization; 1/2 for the test itself.
    pub d_null: f64,
    /// Relative tolerance for the limit-covariance quadrature.
    pub quadrature_tol: f64,
    /// Draw count for the sampling fallback when inversion fails.
    pub mc_fallback_draws: usize,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            s: 2,
            alpha: 0.05,
            ell: 10,
            ell_heuristic: false,
            d_null: 0.5,
            quadrature_tol: 1e-6,
            mc_fallback_draws: 1_000_000,
        }
    }
}

impl TestConfig {
    /// Default block length for a sample of size `n`: 10 for n >= 500, and a
    /// disclosed heuristic for shorter samples. Returns (ell, is_heuristic).
    pub fn default_block_length(n: usize) -> (usize, bool) {
        if n >= 500 {
            (10, false)
        } else {
            let ell = ((n as f64).sqrt() / 2.0).round() as usize;
            (ell.max(10), true)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(Error::ConfigError {
                reason: format!("s = {} must be at least 1", self.s),
            });
        }
        if 2 * self.s >= self.ell {
            return Err(Error::ConfigError {
                reason: format!(
                    "2s = {} must be smaller than the block length ell = {}",
                    2 * self.s,
                    self.ell
                ),
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::ConfigError {
                reason: format!("alpha = {} must lie in (0, 1)", self.alpha),
            });
        }
        if !(self.d_null > -0.5 && self.d_null < 1.5) {
            return Err(Error::ConfigError {
                reason: format!("d_null = {} outside (-1/2, 3/2)", self.d_null),
            });
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(Error::ConfigError {
                reason: "quadrature_tol must be positive".to_string(),
            });
        }
        Ok(())
    }
}

/// Read a one-column series from plain text / CSV.
///
/// One real value per line. Lines starting with `#` and blank lines are
/// skipped. A single non-numeric first data line is treated as a header.
/// A trailing comma (single-column CSV) is tolerated; anything after the
/// first field is an error.
pub fn read_series<R: BufRead>(reader: R) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split(',');
        let first = fields.next().unwrap_or("").trim();
        let rest_nonempty = fields.any(|f| !f.trim().is_empty());
        match first.parse::<f64>() {
            Ok(v) if !rest_nonempty => {
                values.push(v);
                header_allowed = false;
            }
            _ => {
                if header_allowed && !rest_nonempty {
                    // first non-comment line is non-numeric: header
                    header_allowed = false;
                } else {
                    return Err(Error::ParseError {
                        line: idx + 1,
                        content: trimmed.to_string(),
                    });
                }
            }
        }
    }
    TimeSeries::new(values)
}

/// Read a series from a file path.
pub fn read_series_file(path: &Path) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    read_series(std::io::BufReader::new(file))
}
