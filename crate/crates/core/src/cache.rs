//! Advisory on-disk cache for limit-law weights.
//!
//! Repeated CLI runs with the same (d, s, tol) skip the quadrature by
//! reading a small JSON file. The cache is purely an optimization:
//! any read problem falls back to recomputation, and writes are
//! last-writer-wins via a temp-file rename.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::limit_cov::{chi_squared_weights, weights_for, ChiSqWeights, LimitCovariance};
use crate::model::MemoryParameter;

const SCHEMA: &str = "epochtest-weights/1";

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    schema: String,
    entries: Vec<CacheEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    /// d rounded to 1e-12, as the lookup key.
    d_key: String,
    s: usize,
    tol: f64,
    covariance: LimitCovariance,
    weights: Vec<f64>,
}

fn d_key(d: f64) -> String {
    format!("{d:.12}")
}

/// Weight lookup backed by an optional cache file.
#[derive(Debug, Clone, Default)]
pub struct WeightStore {
    path: Option<PathBuf>,
    bypass: bool,
}

impl WeightStore {
    /// Store reading and writing `path`; `None` disables persistence.
    pub fn new(path: Option<PathBuf>) -> Self {
        Self {
            path,
            bypass: false,
        }
    }

    /// A store that never touches the disk.
    pub fn disabled() -> Self {
        Self::new(None)
    }

    /// Keep the path for writing but force recomputation.
    pub fn with_bypass(mut self, bypass: bool) -> Self {
        self.bypass = bypass;
        self
    }

    /// Covariance and weights for (d, s, tol); the flag reports whether the
    /// values came from the cache.
    pub fn get_or_compute(
        &self,
        d: MemoryParameter,
        s: usize,
        tol: f64,
    ) -> Result<(LimitCovariance, ChiSqWeights, bool)> {
        let key = d_key(d.value());
        if !self.bypass {
            if let Some(entry) = self.lookup(&key, s, tol) {
                if let Ok(weights) = ChiSqWeights::new(entry.weights.clone()) {
                    return Ok((entry.covariance, weights, true));
                }
            }
        }
        let (cov, weights) = weights_for(d, s, tol)?;
        debug_assert!(chi_squared_weights(&cov).is_ok());
        self.persist(CacheEntry {
            d_key: key,
            s,
            tol,
            covariance: cov.clone(),
            weights: weights.values().to_vec(),
        });
        Ok((cov, weights, false))
    }

    fn lookup(&self, key: &str, s: usize, tol: f64) -> Option<CacheEntry> {
        let path = self.path.as_ref()?;
        let file = read_cache(path)?;
        file.entries
            .into_iter()
            .find(|e| e.d_key == key && e.s == s && e.tol == tol)
    }

    fn persist(&self, entry: CacheEntry) {
        let Some(path) = self.path.as_ref() else {
            return;
        };
        let mut file = read_cache(path).unwrap_or(CacheFile {
            schema: SCHEMA.to_string(),
            entries: Vec::new(),
        });
        file.entries
            .retain(|e| !(e.d_key == entry.d_key && e.s == entry.s && e.tol == entry.tol));
        file.entries.push(entry);
        // best effort; correctness never depends on the cache
        let _ = write_cache(path, &file);
    }
}

fn read_cache(path: &Path) -> Option<CacheFile> {
    let text = std::fs::read_to_string(path).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    (file.schema == SCHEMA).then_some(file)
}

fn write_cache(path: &Path, file: &CacheFile) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string_pretty(file)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
