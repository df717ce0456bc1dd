//! Fully connected regression network trained with Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Logistic,
    Tanh,
    Relu,
}

impl Activation {
    pub const ALL: [Activation; 4] = [Activation::Identity, Activation::Logistic, Activation::Tanh, Activation::Relu];

    pub fn as_str(&self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Logistic => "logistic",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }

    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(&self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Logistic => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Optimizer constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpSettings {
    fn default() -> Self {
        Self { epochs: 300, batch_size: 32, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `outputs × inputs`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub activation: Activation,
    /// Hidden layers followed by the linear output layer.
    pub layers: Vec<Layer>,
}

impl MlpModel {
    /// Weights drawn uniformly from `±1/√fan_in`, zero biases.
    pub fn init(n_inputs: usize, hidden: &[usize], activation: Activation, rng: &mut impl Rng) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = n_inputs;
        for &units in hidden.iter().chain(std::iter::once(&1)) {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w: Vec<f64> = (0..units * fan_in).map(|_| rng.random_range(-bound..bound)).collect();
            layers.push(Layer {
                weights: Matrix::from_vec(units, fan_in, w).expect("shape"),
                bias: vec![0.0; units],
            });
            fan_in = units;
        }
        Self { activation, layers }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer (weights row-major, then bias).
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            p.extend_from_slice(l.weights.as_slice());
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            let w = l.weights.as_mut_slice();
            let nw = w.len();
            w.copy_from_slice(&p[k..k + nw]);
            k += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
    }

    /// Per-layer buffers for pre-activations and activations.
    fn buffers(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let b: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
        (b.clone(), b)
    }

    /// Fills the pre-activations `zs` and activations `acts` of every layer
    /// for one input; the last layer is linear.
    fn forward(&self, x: &[f64], zs: &mut [Vec<f64>], acts: &mut [Vec<f64>]) {
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let (done, rest) = acts.split_at_mut(li);
            let input = if li == 0 { x } else { &done[li - 1] };
            let z = &mut zs[li];
            for ((zo, w), b) in z.iter_mut().zip(l.weights.iter_rows()).zip(&l.bias) {
                *zo = dot(w, input) + b;
            }
            let a = &mut rest[0];
            if li == last {
                a.copy_from_slice(z);
            } else {
                for (ao, &zo) in a.iter_mut().zip(z.iter()) {
                    *ao = self.activation.apply(zo);
                }
            }
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let (mut zs, mut acts) = self.buffers();
        self.forward(x, &mut zs, &mut acts);
        acts.last().expect("output")[0]
    }

    /// Half mean squared error over `rows` of (`x`, `y`) and its gradient
    /// with respect to [`params`](Self::params).
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n_params()];
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut k = 0;
        for l in &self.layers {
            let nw = l.weights.as_slice().len();
            offsets.push((k, k + nw));
            k += nw + l.bias.len();
        }
        let (mut zs, mut acts) = self.buffers();
        let width = self.layers.iter().map(|l| l.weights.cols().max(l.bias.len())).max().unwrap_or(1);
        let mut delta = Vec::with_capacity(width);
        let mut next = Vec::with_capacity(width);
        let m = rows.len() as f64;
        let mut loss = 0.0;
        for &r in rows {
            let xr = x.row(r);
            self.forward(xr, &mut zs, &mut acts);
            let err = acts.last().expect("output")[0] - y[r];
            loss += 0.5 * err * err;
            delta.clear();
            delta.push(err / m);
            for li in (0..self.layers.len()).rev() {
                let input = if li == 0 { xr } else { &acts[li - 1] };
                let (w_off, b_off) = offsets[li];
                let cols = input.len();
                for (o, &d) in delta.iter().enumerate() {
                    grad[b_off + o] += d;
                    for (g, a) in grad[w_off + o * cols..w_off + (o + 1) * cols].iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if li == 0 {
                    break;
                }
                next.clear();
                next.resize(cols, 0.0);
                for (w, &d) in self.layers[li].weights.iter_rows().zip(&delta) {
                    for (n, wk) in next.iter_mut().zip(w) {
                        *n += d * wk;
                    }
                }
                for ((n, &z), &a) in next.iter_mut().zip(&zs[li - 1]).zip(&acts[li - 1]) {
                    *n *= self.activation.derivative(z, a);
                }
                std::mem::swap(&mut delta, &mut next);
            }
        }
        (loss / m, grad)
    }
}

/// Trains a network with the given hidden layer sizes. All randomness
/// (initialization and batch order) comes from `seed`.
pub fn train_mlp(
    x: &Matrix,
    y: &[f64],
    hidden: &[usize],
    learning_rate: f64,
    activation: Activation,
    seed: u64,
    settings: &MlpSettings,
) -> Result<MlpModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), actual: y.len() });
    }
    if x.rows() < 2 {
        return Err(Error::Degenerate(format!("{} training row(s), MLP needs at least 2", x.rows())));
    }
    if hidden.is_empty() || hidden.contains(&0) || settings.batch_size == 0 {
        return Err(Error::InvalidArgument(format!("hidden layers {hidden:?}, batch size {}", settings.batch_size)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MlpModel::init(x.cols(), hidden, activation, &mut rng);
    let mut params = model.params();
    let mut m1 = vec![0.0; params.len()];
    let mut m2 = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut t = 0i32;
    for epoch in 0..settings.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(settings.batch_size) {
            let (loss, grad) = model.loss_and_gradient(x, y, batch);
            if !loss.is_finite() {
                return Err(Error::TrainingFailed(format!("non-finite loss in epoch {epoch}")));
            }
            epoch_loss += loss * batch.len() as f64;
            t += 1;
            let c1 = 1.0 - settings.beta1.powi(t);
            let c2 = 1.0 - settings.beta2.powi(t);
            for (((p, g), a), b) in params.iter_mut().zip(&grad).zip(&mut m1).zip(&mut m2) {
                *a = settings.beta1 * *a + (1.0 - settings.beta1) * g;
                *b = settings.beta2 * *b + (1.0 - settings.beta2) * g * g;
                *p -= learning_rate * (*a / c1) / ((*b / c2).sqrt() + settings.epsilon);
            }
            model.set_params(&params);
        }
        if !epoch_loss.is_finite() {
            return Err(Error::TrainingFailed(format!("non-finite loss in epoch {epoch}")));
        }
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::TrainingFailed("non-finite weights".into()));
    }
    Ok(model)
}
