//! The epoch-normalized periodogram statistic.
//!
//! For the first s Fourier frequencies of the (truncated) sample, each
//! full-series ordinate is divided by the average of the block ordinates at
//! the matching block frequency; the sum is scaled by `m^{-2d}`.

use crate::error::{Error, Result};
use crate::model::{make_partition, EpochPartition, MemoryParameter, TimeSeries};
use crate::periodogram::{block_periodograms, prefix_periodogram};

/// Value of the statistic together with its unscaled per-frequency ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct QStatistic {
    value: f64,
    s: usize,
    d: MemoryParameter,
    per_frequency: Vec<f64>,
    partition: EpochPartition,
}

impl QStatistic {
    /// `m^{-2d} * sum_j per_frequency[j]`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> MemoryParameter {
        self.d
    }

    /// Self-normalized ratios before the `m^{-2d}` factor, by frequency.
    pub fn per_frequency(&self) -> &[f64] {
        &self.per_frequency
    }

    pub fn partition(&self) -> EpochPartition {
        self.partition
    }
}

/// The `m^{-2d}` normalization; exposed so the pure scaling algebra can be
/// checked on its own.
pub fn normalization_factor(m: usize, d: MemoryParameter) -> f64 {
    (m as f64).powf(-2.0 * d.value())
}

/// Compute the statistic on the first `m * ell` points of `series`.
///
/// Both the full-series and the block periodograms are evaluated on the
/// truncated length, so numerator and denominator refer to the same data.
pub fn q_statistic(
    series: &TimeSeries,
    ell: usize,
    s: usize,
    d: MemoryParameter,
) -> Result<QStatistic> {
    let part = make_partition(series, ell)?;
    if s < 1 || 2 * s >= ell {
        return Err(Error::ConfigError {
            reason: format!("need 1 <= s and 2s < ell, got s = {s}, ell = {ell}"),
        });
    }
    let usable = part.usable_n();

    // anything at or below this is indistinguishable from pure rounding
    // noise in the trigonometric sums, and the asymptotics do not cover
    // such degenerate inputs
    let max_abs = series.values()[..usable]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let denom_floor = ell as f64 * max_abs * max_abs * 1e-28;

    let mut per_frequency = Vec::with_capacity(s);
    for j in 1..=s {
        let numerator = prefix_periodogram(series, usable, j)?.value;
        let blocks = block_periodograms(series, &part, j)?;
        let denom = blocks.iter().map(|o| o.value).sum::<f64>() / blocks.len() as f64;
        if denom <= denom_floor {
            return Err(Error::DegenerateDenominator { j });
        }
        per_frequency.push(numerator / denom);
    }

    let value = normalization_factor(part.num_blocks(), d) * per_frequency.iter().sum::<f64>();
    Ok(QStatistic {
        value,
        s,
        d,
        per_frequency,
        partition: part,
    })
}
