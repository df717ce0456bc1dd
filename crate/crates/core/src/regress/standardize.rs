use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column z-scoring fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Standardizer {
    /// Column means and sample SDs of `x`. Constant columns get SD 1 and
    /// therefore map to 0.
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.is_empty() || x.cols() == 0 {
            return Err(Error::EmptyDataset("cannot standardize an empty matrix".into()));
        }
        let n = x.rows() as f64;
        let mut mean = Vec::with_capacity(x.cols());
        let mut sd = Vec::with_capacity(x.cols());
        for j in 0..x.cols() {
            let col = x.column(j);
            if col.iter().all(|&v| v == col[0]) {
                mean.push(col[0]);
                sd.push(1.0);
                continue;
            }
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
            let s = var.sqrt();
            mean.push(m);
            sd.push(if s > 1e-12 * m.abs() { s } else { 1.0 });
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sd(&self) -> &[f64] {
        &self.sd
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), actual: x.cols() });
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.sd) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}
