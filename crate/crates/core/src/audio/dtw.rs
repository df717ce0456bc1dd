use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

/// Length-normalized dynamic time warping cost between two sequences of
/// feature frames.
///
/// Local cost is the Euclidean distance between frames; allowed steps are
/// `(1,0)`, `(0,1)` and `(1,1)`. Among minimum-cost paths the one visiting
/// the fewest cells is kept, and its cost is divided by that cell count.
pub fn dtw_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("DTW inputs must be non-empty".into()));
    }
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            actual: b.cols(),
        });
    }
    let (n, m) = (a.rows(), b.rows());
    // (cost, cells) per cell of the current and previous row.
    let mut prev: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); m];
    let mut cur: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); m];
    for i in 0..n {
        for j in 0..m {
            let d = squared_distance(a.row(i), b.row(j)).sqrt();
            let best = if i == 0 && j == 0 {
                (0.0, 0)
            } else {
                let mut best = (f64::INFINITY, usize::MAX);
                let mut consider = |c: (f64, usize)| {
                    if c.0 < best.0 || (c.0 == best.0 && c.1 < best.1) {
                        best = c;
                    }
                };
                if i > 0 {
                    consider(prev[j]);
                }
                if j > 0 {
                    consider(cur[j - 1]);
                }
                if i > 0 && j > 0 {
                    consider(prev[j - 1]);
                }
                best
            };
            cur[j] = (best.0 + d, best.1 + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (cost, cells) = prev[m - 1];
    Ok(cost / cells as f64)
}
