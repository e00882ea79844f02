//! Numerical assembly of the limit covariance blocks and the eigenvalue
//! weights of the limiting weighted chi-squared law.
//!
//! Entries are double integrals of trigonometric factors against a kernel
//! that depends on the memory regime: `-log|x-y|` at the boundary d = 1/2,
//! `|x-y|^{2d-1}` in the integrated range, and `|x-y|^{2d+1}` (plus a 1D
//! correction term) in the stationary range. Each double integral is
//! reduced to a 1D integral over the lag u = |x-y| using the closed-form
//! overlap correlation of the trigonometric factors; a direct 2D adaptive
//! rule is kept as a fallback route.
//!
//! The overall scalar factor delta common to every entry (and hence to the
//! normalizer D) is omitted: the weights are eigenvalues of Sigma * D^{-1},
//! which is invariant under any common rescaling. The sign convention in
//! the integrated range is fixed so the blocks come out positive definite,
//! which the builder asserts.

use serde::{Deserialize, Serialize};

use crate::eigen::{symmetric_eigenvalues, SymMatrix};
use crate::error::{Error, Result};
use crate::model::MemoryParameter;
use crate::quadrature::{integrate, integrate_unit_square};

/// Kernel-evaluation budget per covariance entry.
pub const ENTRY_EVAL_BUDGET: u64 = 10_000_000;

/// Default relative tolerance for entry quadrature.
pub const DEFAULT_TOL: f64 = 1e-6;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Memory regime selecting the kernel of the covariance integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// -1/2 < d < 1/2
    Stationary,
    /// d = 1/2 exactly
    Boundary,
    /// 1/2 < d < 3/2
    Integrated,
}

fn regime_of(d: f64) -> Regime {
    if d == 0.5 {
        Regime::Boundary
    } else if d < 0.5 {
        Regime::Stationary
    } else {
        Regime::Integrated
    }
}

/// integral of cos(2*pi*p*x + phi) dx over [a, b]
fn int_cos(p: i64, phi: f64, a: f64, b: f64) -> f64 {
    if p == 0 {
        (b - a) * phi.cos()
    } else {
        let w = TWO_PI * p as f64;
        ((w * b + phi).sin() - (w * a + phi).sin()) / w
    }
}

/// Overlap correlation of cos(2*pi*i x) and cos(2*pi*j y) at lag u,
/// i.e. the weight of K(u) in the reduced 1D integral.
fn rho_cos(i: usize, j: usize, u: f64) -> f64 {
    let (lo, hi) = (i.min(j) as i64, i.max(j) as i64);
    let theta_lo = TWO_PI * lo as f64 * u;
    let theta_hi = TWO_PI * hi as f64 * u;
    0.5 * (int_cos(lo - hi, theta_hi, u, 1.0)
        + int_cos(lo + hi, -theta_hi, u, 1.0)
        + int_cos(hi - lo, theta_lo, u, 1.0)
        + int_cos(lo + hi, -theta_lo, u, 1.0))
}

/// Overlap correlation of sin(2*pi*i x) and sin(2*pi*j y) at lag u.
fn rho_sin(i: usize, j: usize, u: f64) -> f64 {
    let (lo, hi) = (i.min(j) as i64, i.max(j) as i64);
    let theta_lo = TWO_PI * lo as f64 * u;
    let theta_hi = TWO_PI * hi as f64 * u;
    0.5 * (int_cos(lo - hi, theta_hi, u, 1.0) - int_cos(lo + hi, -theta_hi, u, 1.0)
        + int_cos(hi - lo, theta_lo, u, 1.0)
        - int_cos(lo + hi, -theta_lo, u, 1.0))
}

#[derive(Debug, Clone, Copy)]
enum TrigPair {
    CosCos,
    SinSin,
}

/// The double integral of the trig pair against kernel K via the 1D lag
/// reduction, with a direct 2D route as fallback.
fn lag_integral(
    pair: TrigPair,
    i: usize,
    j: usize,
    kernel: impl Fn(f64) -> f64 + Copy,
    tol: f64,
) -> Result<f64> {
    let rho = move |u: f64| match pair {
        TrigPair::CosCos => rho_cos(i, j, u),
        TrigPair::SinSin => rho_sin(i, j, u),
    };
    let f = move |u: f64| kernel(u) * rho(u);
    match integrate(&f, 0.0, 1.0, tol, ENTRY_EVAL_BUDGET, true) {
        Ok(v) => Ok(v),
        Err(Error::QuadratureNonConvergence { .. }) => {
            let g = move |x: f64, y: f64| {
                let k = kernel((x - y).abs());
                match pair {
                    TrigPair::CosCos => {
                        k * (TWO_PI * i as f64 * x).cos() * (TWO_PI * j as f64 * y).cos()
                    }
                    TrigPair::SinSin => {
                        k * (TWO_PI * i as f64 * x).sin() * (TWO_PI * j as f64 * y).sin()
                    }
                }
            };
            integrate_unit_square(&g, tol, ENTRY_EVAL_BUDGET)
        }
        Err(e) => Err(e),
    }
}

/// Correction term of the stationary-regime cosine block:
/// `1 - (2d+1) * integral of x^{2d} (cos(2 pi i x) + cos(2 pi j x)) dx`.
///
/// Depends on both frequency indices despite its scalar-looking name.
pub fn a_term(d: MemoryParameter, i: usize, j: usize) -> Result<f64> {
    let dv = d.value();
    if !(-0.5..0.5).contains(&dv) {
        return Err(Error::RegimeError { d: dv });
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let power = 2.0 * dv;
    let mut moments = [0.0; 2];
    for (slot, k) in moments.iter_mut().zip([lo, hi]) {
        let f = move |x: f64| x.powf(power) * (TWO_PI * k as f64 * x).cos();
        *slot = integrate(&f, 0.0, 1.0, 1e-10, ENTRY_EVAL_BUDGET, true)?;
    }
    Ok(1.0 - (2.0 * dv + 1.0) * (moments[0] + moments[1]))
}

/// Entry (i, j) of the cosine block for memory parameter d (delta omitted,
/// positive-definite sign convention).
pub fn kernel_integral_cos(d: MemoryParameter, i: usize, j: usize, tol: f64) -> Result<f64> {
    let dv = d.value();
    match regime_of(dv) {
        Regime::Boundary => {
            let v = lag_integral(TrigPair::CosCos, i, j, |u| -(u.ln()), tol)?;
            Ok(0.5 * v)
        }
        Regime::Integrated => {
            let beta = 2.0 * dv - 1.0;
            let v = lag_integral(TrigPair::CosCos, i, j, move |u| u.powf(beta), tol)?;
            Ok(-0.5 * v)
        }
        Regime::Stationary => {
            let beta = 2.0 * dv + 1.0;
            let v = lag_integral(TrigPair::SinSin, i, j, move |u| u.powf(beta), tol)?;
            let a = a_term(d, i, j)?;
            Ok(-(a + 2.0 * std::f64::consts::PI.powi(2) * (i * j) as f64 * v))
        }
    }
}

/// Entry (i, j) of the sine block for memory parameter d.
pub fn kernel_integral_sin(d: MemoryParameter, i: usize, j: usize, tol: f64) -> Result<f64> {
    let dv = d.value();
    match regime_of(dv) {
        Regime::Boundary => {
            let v = lag_integral(TrigPair::SinSin, i, j, |u| -(u.ln()), tol)?;
            Ok(0.5 * v)
        }
        Regime::Integrated => {
            let beta = 2.0 * dv - 1.0;
            let v = lag_integral(TrigPair::SinSin, i, j, move |u| u.powf(beta), tol)?;
            Ok(-0.5 * v)
        }
        Regime::Stationary => {
            let beta = 2.0 * dv + 1.0;
            let v = lag_integral(TrigPair::CosCos, i, j, move |u| u.powf(beta), tol)?;
            Ok(-2.0 * std::f64::consts::PI.powi(2) * (i * j) as f64 * v)
        }
    }
}

/// The assembled limit covariance: cosine and sine blocks plus the diagonal
/// normalizer `D_jj = Sigma^c_jj + Sigma^s_jj`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCovariance {
    d: f64,
    s: usize,
    sigma_cos: Vec<Vec<f64>>,
    sigma_sin: Vec<Vec<f64>>,
    d_diag: Vec<f64>,
    /// Records that the common delta factor is set to 1; the weights are
    /// invariant to it.
    delta_omitted: bool,
    tol: f64,
}

impl LimitCovariance {
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn sigma_cos(&self) -> &[Vec<f64>] {
        &self.sigma_cos
    }

    pub fn sigma_sin(&self) -> &[Vec<f64>] {
        &self.sigma_sin
    }

    pub fn d_diag(&self) -> &[f64] {
        &self.d_diag
    }

    pub fn delta_omitted(&self) -> bool {
        self.delta_omitted
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Rescale both blocks by c > 0 (the weights must not change).
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0);
        let scale_rows = |m: &[Vec<f64>]| {
            m.iter()
                .map(|r| r.iter().map(|v| c * v).collect())
                .collect()
        };
        Self {
            d: self.d,
            s: self.s,
            sigma_cos: scale_rows(&self.sigma_cos),
            sigma_sin: scale_rows(&self.sigma_sin),
            d_diag: self.d_diag.iter().map(|v| c * v).collect(),
            delta_omitted: self.delta_omitted,
            tol: self.tol,
        }
    }

    pub(crate) fn from_parts(
        d: f64,
        s: usize,
        sigma_cos: Vec<Vec<f64>>,
        sigma_sin: Vec<Vec<f64>>,
        d_diag: Vec<f64>,
        tol: f64,
    ) -> Self {
        Self {
            d,
            s,
            sigma_cos,
            sigma_sin,
            d_diag,
            delta_omitted: true,
            tol,
        }
    }
}

/// Eigenvalue weights of the limiting weighted chi-squared sum, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSqWeights {
    zeta: Vec<f64>,
}

impl ChiSqWeights {
    /// Weights must be positive and finite; sorted descending on entry.
    pub fn new(mut zeta: Vec<f64>) -> Result<Self> {
        if zeta.is_empty() || zeta.iter().any(|&z| !(z > 0.0) || !z.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                reason: "weights must be positive".to_string(),
            });
        }
        zeta.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { zeta })
    }

    pub fn values(&self) -> &[f64] {
        &self.zeta
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.zeta.iter().sum()
    }
}

/// Build the covariance blocks for (d, s), validating symmetry, positive
/// definiteness, and positivity of the normalizer.
pub fn build_limit_covariance(d: MemoryParameter, s: usize, tol: f64) -> Result<LimitCovariance> {
    assert!(s >= 1, "s must be positive");
    let mut sigma_cos = vec![vec![0.0; s]; s];
    let mut sigma_sin = vec![vec![0.0; s]; s];
    for i in 1..=s {
        for j in i..=s {
            let c = kernel_integral_cos(d, i, j, tol)?;
            let sn = kernel_integral_sin(d, i, j, tol)?;
            sigma_cos[i - 1][j - 1] = c;
            sigma_cos[j - 1][i - 1] = c;
            sigma_sin[i - 1][j - 1] = sn;
            sigma_sin[j - 1][i - 1] = sn;
        }
    }
    let d_diag: Vec<f64> = (0..s).map(|k| sigma_cos[k][k] + sigma_sin[k][k]).collect();

    if let Some(k) = d_diag.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            reason: format!("D_{}{} = {} is not positive", k + 1, k + 1, d_diag[k]),
        });
    }
    for (name, block) in [("cos", &sigma_cos), ("sin", &sigma_sin)] {
        let m = SymMatrix::from_rows(block);
        let eig = symmetric_eigenvalues(&m)?;
        let min = *eig.last().expect("nonempty");
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                reason: format!(
                    "{name} block has minimum eigenvalue {min:e} at d = {}",
                    d.value()
                ),
            });
        }
    }

    Ok(LimitCovariance::from_parts(
        d.value(),
        s,
        sigma_cos,
        sigma_sin,
        d_diag,
        tol,
    ))
}

/// Eigenvalue weights of `Sigma(d) * D^{-1}`, computed from the symmetric
/// similarity `D^{-1/2} Sigma D^{-1/2}` with the diagonal repeated once for
/// the cosine block and once for the sine block. Validates positivity and
/// the trace identity `sum zeta = s`.
pub fn chi_squared_weights(cov: &LimitCovariance) -> Result<ChiSqWeights> {
    let s = cov.s;
    let inv_sqrt: Vec<f64> = cov.d_diag.iter().map(|&v| 1.0 / v.sqrt()).collect();
    let mut zeta = Vec::with_capacity(2 * s);
    for block in [&cov.sigma_cos, &cov.sigma_sin] {
        let mut m = SymMatrix::zeros(s);
        for i in 0..s {
            for j in 0..s {
                m.set(i, j, block[i][j] * inv_sqrt[i] * inv_sqrt[j]);
            }
        }
        let eig = symmetric_eigenvalues(&m)?;
        zeta.extend(eig);
    }
    let weights = ChiSqWeights::new(zeta)?;
    let trace_gap = (weights.sum() - s as f64).abs();
    if trace_gap > 1e-8 {
        return Err(Error::NotPositiveDefinite {
            reason: format!(
                "trace identity violated: sum of weights differs from s by {trace_gap:e}"
            ),
        });
    }
    Ok(weights)
}

/// Convenience: covariance plus weights for (d, s) at tolerance `tol`.
pub fn weights_for(
    d: MemoryParameter,
    s: usize,
    tol: f64,
) -> Result<(LimitCovariance, ChiSqWeights)> {
    let cov = build_limit_covariance(d, s, tol)?;
    let w = chi_squared_weights(&cov)?;
    Ok((cov, w))
}
