//! Squared-error gradient boosting with exact greedy regression trees.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// L2 penalty on leaf weights.
pub const LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes stored flat; node 0 is the root. Rows with `x < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    k = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], k: usize) -> usize {
            match nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GbtModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| self.learning_rate * t.predict_row(x)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
}

fn score(g: f64, h: f64) -> f64 {
    g * g / (h + LAMBDA)
}

struct Builder<'a> {
    x: &'a Matrix,
    grad: &'a [f64],
    features: &'a [usize],
    max_depth: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h = rows.len() as f64;
        self.nodes.push(Node::Leaf { value: -g / (h + LAMBDA) });
        self.nodes.len() - 1
    }

    /// Best (gain, feature, threshold) over the allowed features; ties keep
    /// the lowest feature index, then the lowest threshold.
    fn best_split(&self, rows: &[usize]) -> Option<(f64, usize, f64)> {
        let g_total: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h_total = rows.len() as f64;
        let parent = score(g_total, h_total);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for &f in self.features {
            sorted.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                gl += self.grad[sorted[k]];
                hl += 1.0;
                let (lo, hi) = (self.x.get(sorted[k], f), self.x.get(sorted[k + 1], f));
                if lo == hi {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl) + score(g_total - gl, h_total - hl) - parent);
                if gain > best.map_or(0.0, |b| b.0) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        if depth >= self.max_depth || rows.len() < 2 {
            return self.leaf(rows);
        }
        let Some((_, feature, threshold)) = self.best_split(rows) else {
            return self.leaf(rows);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x.get(i, feature) < threshold);
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[me] = Node::Split { feature, threshold, left, right };
        me
    }
}

fn subsample_count(frac: f64, n: usize) -> usize {
    ((frac * n as f64).round() as usize).clamp(1, n)
}

/// Trains a boosted ensemble; row and column subsets are drawn per tree
/// from `seed`. Returns the model and the training loss (half MSE) after
/// each round, with the loss of the base score first.
pub fn train_gbt(x: &Matrix, y: &[f64], p: &GbtParams, seed: u64) -> Result<(GbtModel, Vec<f64>)> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), actual: y.len() });
    }
    if x.rows() < 2 || x.cols() == 0 {
        return Err(Error::Degenerate(format!("{} × {} training matrix", x.rows(), x.cols())));
    }
    if !(p.subsample > 0.0 && p.subsample <= 1.0)
        || !(p.colsample_bytree > 0.0 && p.colsample_bytree <= 1.0)
        || p.max_depth == 0
    {
        return Err(Error::InvalidArgument(format!("{p:?}")));
    }
    let n = x.rows();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let half_mse = |pred: &[f64]| pred.iter().zip(y).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum::<f64>() / n as f64;
    let mut losses = vec![half_mse(&pred)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = Vec::with_capacity(p.n_estimators);
    for _ in 0..p.n_estimators {
        let grad: Vec<f64> = pred.iter().zip(y).map(|(a, b)| a - b).collect();
        let mut rows = sample(&mut rng, n, subsample_count(p.subsample, n)).into_vec();
        rows.sort_unstable();
        let mut features = sample(&mut rng, x.cols(), subsample_count(p.colsample_bytree, x.cols())).into_vec();
        features.sort_unstable();
        let mut b = Builder { x, grad: &grad, features: &features, max_depth: p.max_depth, nodes: Vec::new() };
        b.grow(&rows, 0);
        let tree = Tree { nodes: b.nodes };
        for (i, v) in pred.iter_mut().enumerate() {
            *v += p.learning_rate * tree.predict_row(x.row(i));
        }
        losses.push(half_mse(&pred));
        trees.push(tree);
    }
    Ok((GbtModel { base_score, learning_rate: p.learning_rate, trees }, losses))
}
