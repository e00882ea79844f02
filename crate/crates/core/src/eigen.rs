//! Cyclic Jacobi eigensolver for small dense symmetric matrices.
//!
//! The limit covariance is at most 2s x 2s with s around 2..5, so a simple
//! rotation sweep is both adequate and structurally guaranteed to produce
//! real eigenvalues.

use crate::error::{Error, Result};

/// Dense row-major symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j) * self.get(i, j);
                }
            }
        }
        s.sqrt()
    }
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(matrix: &SymMatrix) -> Result<Vec<f64>> {
    let n = matrix.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![matrix.get(0, 0)]);
    }
    let mut a = matrix.clone();
    let scale: f64 = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        if a.off_diagonal_norm() <= 1e-14 * scale * n as f64 {
            let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
            eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
            return Ok(eig);
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // stable rotation parameter t = sign(theta)/(|theta| + sqrt(theta^2+1))
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    Err(Error::EigenFailure)
}
