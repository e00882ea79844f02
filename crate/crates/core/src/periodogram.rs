//! Full-series and per-epoch periodogram ordinates.
//!
//! Only the first few ordinates are ever needed (s is small), so the sums
//! are computed directly in O(s * n) with compensated accumulation rather
//! than through a transform.

use crate::error::{Error, Result};
use crate::model::{EpochPartition, TimeSeries};

/// A single periodogram ordinate at the Fourier frequency `2*pi*j/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodogramOrdinate {
    /// Frequency index, `1 <= j < N/2`.
    pub j: usize,
    /// Angular frequency `2*pi*j/N`.
    pub lambda: f64,
    /// Nonnegative ordinate value.
    pub value: f64,
}

/// Compensated (Kahan) summation; the statistic divides two quantities on
/// very different scales, so relative error in each sum matters.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum
    }
}

/// Trigonometric sums of `x` against frequency `2*pi*j/period`, indices
/// taken as t = offset+1, offset+2, ...
///
/// The phase is reduced exactly with integer arithmetic before the trig
/// call, so block sums are identical whether indexed globally or locally.
fn trig_sums(x: &[f64], j: usize, period: usize, offset: usize) -> (f64, f64) {
    let mut cos_acc = KahanSum::default();
    let mut sin_acc = KahanSum::default();
    let two_pi = 2.0 * std::f64::consts::PI;
    for (idx, &v) in x.iter().enumerate() {
        let t = (offset + idx + 1) as u64;
        let phase_idx = (t * j as u64) % period as u64;
        let theta = two_pi * phase_idx as f64 / period as f64;
        let (s, c) = theta.sin_cos();
        cos_acc.add(v * c);
        sin_acc.add(v * s);
    }
    (cos_acc.total(), sin_acc.total())
}

fn ordinate_from_sums(j: usize, period: usize, cos_sum: f64, sin_sum: f64) -> PeriodogramOrdinate {
    let two_pi = 2.0 * std::f64::consts::PI;
    PeriodogramOrdinate {
        j,
        lambda: two_pi * j as f64 / period as f64,
        value: (cos_sum * cos_sum + sin_sum * sin_sum) / (two_pi * period as f64),
    }
}

/// Periodogram of the whole series at its `j`-th Fourier frequency.
pub fn full_periodogram(series: &TimeSeries, j: usize) -> Result<PeriodogramOrdinate> {
    let n = series.len();
    if j < 1 || 2 * j >= n {
        return Err(Error::FrequencyOutOfRange { j, len: n });
    }
    let (c, s) = trig_sums(series.values(), j, n, 0);
    Ok(ordinate_from_sums(j, n, c, s))
}

/// Periodogram of the leading `len` points at frequency `2*pi*j/len`.
/// Used by the statistic to evaluate the full-series ordinate on the
/// truncated length `m * ell`.
pub fn prefix_periodogram(
    series: &TimeSeries,
    len: usize,
    j: usize,
) -> Result<PeriodogramOrdinate> {
    assert!(len >= 2 && len <= series.len());
    if j < 1 || 2 * j >= len {
        return Err(Error::FrequencyOutOfRange { j, len });
    }
    let (c, s) = trig_sums(&series.values()[..len], j, len, 0);
    Ok(ordinate_from_sums(j, len, c, s))
}

/// Per-epoch periodograms at the block Fourier frequency `2*pi*j/ell`,
/// ordered by block index.
pub fn block_periodograms(
    series: &TimeSeries,
    part: &EpochPartition,
    j: usize,
) -> Result<Vec<PeriodogramOrdinate>> {
    let ell = part.ell();
    if j < 1 || 2 * j >= ell {
        return Err(Error::FrequencyOutOfRange { j, len: ell });
    }
    let values = series.values();
    let mut out = Vec::with_capacity(part.num_blocks());
    for h in 0..part.num_blocks() {
        let block = &values[part.block_range(h)];
        // the phase offset (h-1)*ell*lambda'_j is an exact multiple of 2*pi
        let (c, s) = trig_sums(block, j, ell, 0);
        out.push(ordinate_from_sums(j, ell, c, s));
    }
    Ok(out)
}
