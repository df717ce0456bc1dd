use serde::Serialize;

use super::chi2::chi_square_sf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub df: usize,
    pub p: f64,
    pub n_blocks: usize,
    pub n_treatments: usize,
}

/// Mid-ranks (1-based) of `v`, ties sharing their average rank.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman rank test over `blocks` (rows) × treatments (columns), with
/// the tie correction. When every block is fully tied the statistic is 0.
pub fn friedman_test(blocks: &[Vec<f64>]) -> Result<FriedmanResult> {
    let n = blocks.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("{n} block(s), the Friedman test needs at least 2")));
    }
    let k = blocks[0].len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("{k} treatment(s), the Friedman test needs at least 2")));
    }
    let mut rank_sums = vec![0.0; k];
    let mut ties = 0.0;
    for (b, row) in blocks.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Validation(format!("block {b} has {} cells, expected {k}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("block {b} has a missing or non-finite cell")));
        }
        let ranks = mid_ranks(row);
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        let mut sorted = row.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < k {
            let mut j = i;
            while j + 1 < k && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            ties += t * t * t - t;
            i = j + 1;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let ss: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * ss - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - ties / (nf * (kf * kf * kf - kf));
    let chi2 = if correction <= 1e-12 { 0.0 } else { (raw / correction).max(0.0) };
    let df = k - 1;
    Ok(FriedmanResult { chi2, df, p: chi_square_sf(chi2, df as f64)?, n_blocks: n, n_treatments: k })
}
