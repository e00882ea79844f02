//! Epoch-periodogram test for I(1) nonstationarity against stationary
//! short-, long-, or anticipative-memory alternatives.
//!
//! The statistic sums the first few full-series periodogram ordinates, each
//! self-normalized by the average periodogram over consecutive epochs, and
//! is compared against the left tail of a weighted chi-squared limit law
//! whose weights come from an explicit covariance built by numerical
//! quadrature. The crate also ships the synthetic generators and the Monte
//! Carlo harness used to study size, power, and convergence to the limit.

// validation sites use `!(x > 0)` on purpose: NaN must fail the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod dgp;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod limit_cov;
pub mod model;
pub mod par;
pub mod periodogram;
pub mod procedure;
pub mod quadrature;
pub mod rng;
pub mod statistic;
pub mod wchisq;

pub use error::{Error, Result};
pub use limit_cov::{build_limit_covariance, chi_squared_weights, ChiSqWeights, LimitCovariance};
pub use model::{make_partition, EpochPartition, MemoryParameter, TestConfig, TimeSeries};
pub use procedure::{run_test, run_test_with_store, Decision, TestOutcome};
pub use statistic::{q_statistic, QStatistic};
pub use wchisq::WeightedChiSq;
