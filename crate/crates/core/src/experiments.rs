//! Monte Carlo harness: size/power curves over generator grids, overlays of
//! the finite-sample statistic against its limit law, and convergence
//! tables across sample sizes.
//!
//! Replicate r of grid point g always draws from the stream derived from
//! (master seed, g, r) and results are accumulated in index order, so every
//! table is identical for any worker count.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cache::WeightStore;
use crate::dgp::{DgpSpec, PreparedDgp};
use crate::error::{Error, Result};
use crate::limit_cov::ChiSqWeights;
use crate::model::{MemoryParameter, TestConfig, TimeSeries};
use crate::par::par_map;
use crate::rng::stream_rng;
use crate::statistic::q_statistic;
use crate::wchisq::WeightedChiSq;

pub const PLAN_SCHEMA: &str = "epochtest-plan/1";
pub const MANIFEST_SCHEMA: &str = "epochtest-manifest/1";

/// One cell of a generator grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub label: String,
    pub dgp: DgpSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    /// Rejection rates of the test across the grid.
    SizePower,
    /// Replicated statistic values paired with the matching limit weights.
    CdfOverlay,
    /// Distance to the limit law across sample sizes.
    Convergence,
}

/// A complete, serializable experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub schema: String,
    pub name: String,
    pub kind: PlanKind,
    pub config: TestConfig,
    pub replications: usize,
    pub master_seed: u64,
    pub grid: Vec<GridPoint>,
    /// Sample sizes for convergence plans; ignored otherwise.
    #[serde(default)]
    pub n_grid: Vec<usize>,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::PlanError { reason });
        if self.schema != PLAN_SCHEMA {
            return fail(format!("unknown schema {:?}", self.schema));
        }
        if self.replications < 100 {
            return fail(format!(
                "replications = {} below the minimum 100",
                self.replications
            ));
        }
        if self.grid.is_empty() {
            return fail("empty grid".to_string());
        }
        self.config.validate()?;
        let n0 = self.grid[0].dgp.n;
        for point in &self.grid {
            point.dgp.validate()?;
            if point.dgp.n != n0 {
                return fail("all grid points must share the same n".to_string());
            }
        }
        let mut labels: Vec<&str> = self.grid.iter().map(|g| g.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.grid.len() {
            return fail("grid labels must be unique".to_string());
        }
        if self.kind == PlanKind::Convergence && self.n_grid.is_empty() {
            return fail("convergence plans need a nonempty n_grid".to_string());
        }
        Ok(())
    }
}

/// One row of a rejection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub label: String,
    pub rate: f64,
    /// Binomial standard error sqrt(p(1-p)/R).
    pub std_error: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

/// Rejection rate of the test at every grid point.
pub fn size_power_curve(
    plan: &ExperimentPlan,
    store: &WeightStore,
    threads: usize,
) -> Result<RejectionTable> {
    plan.validate()?;
    let config = &plan.config;
    let d_null = MemoryParameter::new(config.d_null).expect("validated");
    let (_, weights, _) = store.get_or_compute(d_null, config.s, config.quadrature_tol)?;
    let q_alpha = WeightedChiSq::new(weights).quantile(config.alpha)?;

    let mut rows = Vec::with_capacity(plan.grid.len());
    for (g, point) in plan.grid.iter().enumerate() {
        let prepared = PreparedDgp::prepare(&point.dgp)?;
        let rejected: Vec<Result<bool>> = par_map(plan.replications, threads, |rep| {
            let mut rng = stream_rng(plan.master_seed, &[g as u64, rep as u64]);
            let series = TimeSeries::new(prepared.sample(&mut rng))?;
            let stat = q_statistic(&series, config.ell, config.s, d_null)?;
            Ok(stat.value() < q_alpha)
        });
        let mut count = 0usize;
        for r in rejected {
            if r? {
                count += 1;
            }
        }
        let rate = count as f64 / plan.replications as f64;
        rows.push(RejectionRow {
            label: point.label.clone(),
            rate,
            std_error: (rate * (1.0 - rate) / plan.replications as f64).sqrt(),
            replications: plan.replications,
        });
    }
    Ok(RejectionTable { rows })
}

/// Replicated statistic values computed with the normalization matching the
/// generator's memory parameter, paired with the limit weights for that
/// same parameter.
#[derive(Debug, Clone)]
pub struct CdfOverlay {
    pub label: String,
    pub d: f64,
    pub stats: Vec<f64>,
    pub weights: ChiSqWeights,
}

pub fn cdf_overlay(
    label: &str,
    dgp: &DgpSpec,
    config: &TestConfig,
    replications: usize,
    master_seed: u64,
    store: &WeightStore,
    threads: usize,
) -> Result<CdfOverlay> {
    config.validate()?;
    dgp.validate()?;
    let d = MemoryParameter::new(dgp.memory_parameter())?;
    let (_, weights, _) = store.get_or_compute(d, config.s, config.quadrature_tol)?;
    let prepared = PreparedDgp::prepare(dgp)?;
    let stats: Vec<Result<f64>> = par_map(replications, threads, |rep| {
        let mut rng = stream_rng(master_seed, &[rep as u64]);
        let series = TimeSeries::new(prepared.sample(&mut rng))?;
        Ok(q_statistic(&series, config.ell, config.s, d)?.value())
    });
    let stats = stats.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(CdfOverlay {
        label: label.to_string(),
        d: d.value(),
        stats,
        weights,
    })
}

/// One-sample Kolmogorov-Smirnov distance between the replicated statistic
/// values and the inversion CDF of the limit law.
pub fn ks_distance_to_limit(overlay: &CdfOverlay, cdf_eps: f64) -> Result<f64> {
    let mut sorted = overlay.stats.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dist = WeightedChiSq::new(overlay.weights.clone());
    let cdf = dist.cdf_batch(&sorted, cdf_eps)?;
    let n = sorted.len() as f64;
    let mut ks = 0.0f64;
    for (i, &f) in cdf.iter().enumerate() {
        ks = ks.max(f - i as f64 / n);
        ks = ks.max((i + 1) as f64 / n - f);
    }
    Ok(ks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub label: String,
    pub n: usize,
    pub ks: f64,
}

/// KS distance to the limit for every (grid point, sample size) pair.
///
/// The limiting law applies as both the number of epochs and the epoch length
/// grow with n, so the block length is scaled like sqrt(n) relative to the
/// plan's reference (dgp.n, config.ell); holding it fixed would leave a
/// finite-epoch bias floor that never shrinks.
pub fn limit_convergence(
    plan: &ExperimentPlan,
    store: &WeightStore,
    threads: usize,
) -> Result<Vec<ConvergenceRow>> {
    plan.validate()?;
    let n_ref = plan.grid[0].dgp.n as f64;
    let mut rows = Vec::new();
    for (g, point) in plan.grid.iter().enumerate() {
        for (ni, &n) in plan.n_grid.iter().enumerate() {
            let mut dgp = point.dgp.clone();
            dgp.n = n;
            let scaled = (plan.config.ell as f64 * (n as f64 / n_ref).sqrt()).round() as usize;
            let config = TestConfig {
                ell: scaled.max(2 * plan.config.s + 1),
                ..plan.config
            };
            let seed = crate::rng::derive_seed(plan.master_seed, &[g as u64, ni as u64]);
            let overlay = cdf_overlay(
                &point.label,
                &dgp,
                &config,
                plan.replications,
                seed,
                store,
                threads,
            )?;
            rows.push(ConvergenceRow {
                label: point.label.clone(),
                n,
                ks: ks_distance_to_limit(&overlay, 1e-5)?,
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// file output

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_rejection_csv<W: Write>(w: &mut W, table: &RejectionTable) -> Result<()> {
    writeln!(w, "label,rate,std_error,replications")?;
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.label, row.rate, row.std_error, row.replications
        )?;
    }
    Ok(())
}

/// Sorted statistic values with empirical and limit CDF columns.
pub fn write_overlay_csv<W: Write>(w: &mut W, overlay: &CdfOverlay, cdf_eps: f64) -> Result<()> {
    let mut sorted = overlay.stats.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dist = WeightedChiSq::new(overlay.weights.clone());
    let limit = dist.cdf_batch(&sorted, cdf_eps)?;
    writeln!(w, "rank,statistic,empirical_cdf,limit_cdf")?;
    let n = sorted.len();
    for (i, (x, f)) in sorted.iter().zip(&limit).enumerate() {
        writeln!(w, "{},{},{},{}", i + 1, x, (i + 1) as f64 / n as f64, f)?;
    }
    Ok(())
}

pub fn write_convergence_csv<W: Write>(w: &mut W, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "label,n,ks_distance")?;
    for row in rows {
        writeln!(w, "{},{},{}", row.label, row.n, row.ks)?;
    }
    Ok(())
}

/// Execution record written next to the tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub name: String,
    pub version: String,
    pub threads: usize,
    pub elapsed_ms: u128,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
    pub plan: ExperimentPlan,
}

/// Run a plan, writing one CSV per table plus `manifest.json` into
/// `out_dir`. The CSV bytes depend only on the plan, never on `threads`.
pub fn run_plan(
    plan: &ExperimentPlan,
    out_dir: &Path,
    store: &WeightStore,
    threads: usize,
) -> Result<Manifest> {
    plan.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let mut outputs: Vec<PathBuf> = Vec::new();
    let summary = match plan.kind {
        PlanKind::SizePower => {
            let table = size_power_curve(plan, store, threads)?;
            let path = out_dir.join(format!("{}_rejection.csv", sanitize(&plan.name)));
            let mut buf = Vec::new();
            write_rejection_csv(&mut buf, &table)?;
            std::fs::write(&path, buf)?;
            outputs.push(path);
            serde_json::to_value(&table)?
        }
        PlanKind::CdfOverlay => {
            let mut ks_summary = Vec::new();
            for (g, point) in plan.grid.iter().enumerate() {
                let seed = crate::rng::derive_seed(plan.master_seed, &[g as u64]);
                let overlay = cdf_overlay(
                    &point.label,
                    &point.dgp,
                    &plan.config,
                    plan.replications,
                    seed,
                    store,
                    threads,
                )?;
                let path = out_dir.join(format!(
                    "{}_{}_overlay.csv",
                    sanitize(&plan.name),
                    sanitize(&point.label)
                ));
                let mut buf = Vec::new();
                write_overlay_csv(&mut buf, &overlay, 1e-6)?;
                std::fs::write(&path, buf)?;
                outputs.push(path);
                let ks = ks_distance_to_limit(&overlay, 1e-5)?;
                ks_summary.push(serde_json::json!({
                    "label": point.label,
                    "d": overlay.d,
                    "ks_distance": ks,
                    "weights": overlay.weights.values(),
                }));
            }
            serde_json::Value::Array(ks_summary)
        }
        PlanKind::Convergence => {
            let rows = limit_convergence(plan, store, threads)?;
            let path = out_dir.join(format!("{}_convergence.csv", sanitize(&plan.name)));
            let mut buf = Vec::new();
            write_convergence_csv(&mut buf, &rows)?;
            std::fs::write(&path, buf)?;
            outputs.push(path);
            serde_json::to_value(&rows)?
        }
    };

    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.to_string(),
        name: plan.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        elapsed_ms: started.elapsed().as_millis(),
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        summary,
        plan: plan.clone(),
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::DgpKind;

    fn tiny_plan() -> ExperimentPlan {
        ExperimentPlan {
            schema: PLAN_SCHEMA.to_string(),
            name: "tiny".to_string(),
            kind: PlanKind::SizePower,
            config: TestConfig::default(),
            replications: 100,
            master_seed: 7,
            grid: vec![
                GridPoint {
                    label: "wn".to_string(),
                    dgp: DgpSpec::new(DgpKind::WhiteNoise, 300, 0),
                },
                GridPoint {
                    label: "rw".to_string(),
                    dgp: DgpSpec::new(DgpKind::IntegratedFarima { d_increment: 0.0 }, 300, 0),
                },
            ],
            n_grid: Vec::new(),
        }
    }

    #[test]
    fn plan_validation() {
        let mut plan = tiny_plan();
        plan.validate().unwrap();
        plan.replications = 50;
        assert!(plan.validate().is_err());
        let mut plan = tiny_plan();
        plan.grid[1].label = "wn".to_string();
        assert!(plan.validate().is_err());
        let mut plan = tiny_plan();
        plan.grid[1].dgp.n = 200;
        assert!(plan.validate().is_err());
        let mut plan = tiny_plan();
        plan.schema = "bogus".to_string();
        assert!(plan.validate().is_err());
    }

    #[test]
    fn plan_json_roundtrip() {
        let plan = tiny_plan();
        let text = serde_json::to_string_pretty(&plan).unwrap();
        let back = ExperimentPlan::from_json(&text).unwrap();
        assert_eq!(plan, back);
    }

    #[test]
    fn size_power_separates_endpoints() {
        let table = size_power_curve(&tiny_plan(), &WeightStore::disabled(), 2).unwrap();
        assert_eq!(table.rows.len(), 2);
        let wn = &table.rows[0];
        let rw = &table.rows[1];
        assert!(wn.rate > 0.8, "white noise rate {}", wn.rate);
        assert!(rw.rate < 0.2, "random walk rate {}", rw.rate);
        for row in &table.rows {
            assert!((0.0..=1.0).contains(&row.rate));
            assert!(row.std_error <= 0.5 / (row.replications as f64).sqrt() + 1e-12);
        }
    }

    #[test]
    fn tables_identical_across_thread_counts() {
        let t1 = size_power_curve(&tiny_plan(), &WeightStore::disabled(), 1).unwrap();
        let t8 = size_power_curve(&tiny_plan(), &WeightStore::disabled(), 8).unwrap();
        assert_eq!(t1, t8);
        let mut csv1 = Vec::new();
        let mut csv8 = Vec::new();
        write_rejection_csv(&mut csv1, &t1).unwrap();
        write_rejection_csv(&mut csv8, &t8).unwrap();
        assert_eq!(csv1, csv8);
    }
}
