//! Symmetric 2-tensors on `R^n`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor {
    n: usize,
    entries: Vec<f64>,
}

impl SymmetricTensor {
    /// From a row-major `n x n` array; asymmetry beyond `1e-12` of the
    /// largest entry is a domain error.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("tensor rows must form a non-empty square array"));
        }
        let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::domain(format!("tensor not symmetric at ({i}, {j})")));
                }
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(0.5 * (rows[i][j] + rows[j][i]));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n] }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut t = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            t.entries[i * t.n + i] = v;
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `sum_ij pi_ij^2`.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_trace_free(&self) -> bool {
        self.trace().abs() <= 1e-12 * self.norm_sq().sqrt()
    }

    /// Remove the trace part.
    pub fn trace_free_part(&self) -> Self {
        let h = self.trace() / self.n as f64;
        let mut t = self.clone();
        for i in 0..self.n {
            t.entries[i * self.n + i] -= h;
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|v| c * v).collect(),
        }
    }

    /// Matrix square `pi_ik pi_kj`.
    pub fn square(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.entries[i * n + j] = (0..n).map(|k| self.get(i, k) * self.get(k, j)).sum();
            }
        }
        t
    }

    /// `x^T pi x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.get(i, j) * x[i] * x[j];
            }
        }
        s
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}
