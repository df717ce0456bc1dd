use serde::{Deserialize, Serialize};

use super::gbt::{train_gbt, GbtModel, GbtParams};
use super::grid::ModelSpec;
use super::mlp::{train_mlp, MlpModel, MlpSettings};
use super::standardize::Standardizer;
use super::svr::{train_svr, SvrModel, SvrSettings};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Version tag written into persisted models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Solver settings that are not part of the searched grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub svr: SvrSettings,
    pub mlp: MlpSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelState {
    Svr(SvrModel),
    Mlp(MlpModel),
    Gbt(GbtModel),
}

/// A fitted regressor together with the standardizer of its training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub standardizer: Standardizer,
    pub state: ModelState,
    /// Optional output range; predictions are not clamped by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp: Option<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct Persisted {
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    /// Standardizes `x` and trains `spec` on it.
    pub fn fit(spec: &ModelSpec, x: &Matrix, y: &[f64], seed: u64, opts: &TrainOptions) -> Result<Self> {
        spec.validate()?;
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.rows(), actual: y.len() });
        }
        let standardizer = Standardizer::fit(x)?;
        let z = standardizer.apply(x)?;
        let state = match spec {
            ModelSpec::Svr { c, epsilon, kernel } => {
                ModelState::Svr(train_svr(&z, y, *c, *epsilon, *kernel, &opts.svr)?)
            }
            ModelSpec::Mlp { layers, learning_rate, activation } => {
                ModelState::Mlp(train_mlp(&z, y, layers, *learning_rate, *activation, seed, &opts.mlp)?)
            }
            ModelSpec::Gbt { n_estimators, max_depth, learning_rate, subsample, colsample_bytree } => {
                let p = GbtParams {
                    n_estimators: *n_estimators,
                    max_depth: *max_depth,
                    learning_rate: *learning_rate,
                    subsample: *subsample,
                    colsample_bytree: *colsample_bytree,
                };
                ModelState::Gbt(train_gbt(&z, y, &p, seed)?.0)
            }
        };
        Ok(Self { spec: spec.clone(), standardizer, state, clamp: None })
    }

    pub fn with_clamp(mut self, lo: f64, hi: f64) -> Self {
        self.clamp = Some((lo, hi));
        self
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let z = self.standardizer.apply(x)?;
        Ok(z.iter_rows()
            .map(|r| {
                let v = match &self.state {
                    ModelState::Svr(m) => m.predict_row(r),
                    ModelState::Mlp(m) => m.predict_row(r),
                    ModelState::Gbt(m) => m.predict_row(r),
                };
                match self.clamp {
                    Some((lo, hi)) => v.clamp(lo, hi),
                    None => v,
                }
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&Persisted { version: MODEL_FORMAT_VERSION, model: self.clone() })
            .map_err(|e| Error::Parse { context: "model".into(), message: e.to_string() })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Persisted = serde_json::from_str(text)
            .map_err(|e| Error::Parse { context: "model".into(), message: e.to_string() })?;
        if p.version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedFormat(format!("model format version {}", p.version)));
        }
        Ok(p.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::grid::{smoke_grid, ModelFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random_range(0.0..10.0), rng.random_range(-1.0..1.0), rng.random_range(100.0..200.0)])
            .collect();
        let y = rows.iter().map(|r| 10.0 + 0.8 * r[0] - 2.0 * r[1]).collect();
        (Matrix::from_rows(&rows, 3).unwrap(), y)
    }

    fn all_specs() -> Vec<ModelSpec> {
        ModelFamily::ALL.iter().flat_map(|f| smoke_grid(*f)).collect()
    }

    #[test]
    fn deterministic_and_row_independent() {
        let (x, y) = data(30, 1);
        let opts = TrainOptions { mlp: MlpSettings { epochs: 30, ..Default::default() }, ..Default::default() };
        for spec in all_specs() {
            let a = TrainedModel::fit(&spec, &x, &y, 5, &opts).unwrap();
            let b = TrainedModel::fit(&spec, &x, &y, 5, &opts).unwrap();
            assert_eq!(a, b, "{spec}");
            let p = a.predict(&x).unwrap();
            let perm: Vec<usize> = (0..30).rev().collect();
            let q = a.predict(&x.select_rows(&perm)).unwrap();
            for (i, &k) in perm.iter().enumerate() {
                assert_eq!(q[i], p[k]);
            }
            assert!(a.predict(&Matrix::zeros(0, 3)).unwrap().is_empty());
            assert!(matches!(a.predict(&Matrix::zeros(1, 2)), Err(Error::DimensionMismatch { .. })));
        }
    }

    #[test]
    fn json_round_trip() {
        let (x, y) = data(20, 2);
        let opts = TrainOptions { mlp: MlpSettings { epochs: 5, ..Default::default() }, ..Default::default() };
        for spec in all_specs() {
            let m = TrainedModel::fit(&spec, &x, &y, 1, &opts).unwrap().with_clamp(5.0, 25.0);
            let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
        }
        let bad = r#"{"version": 99, "model": null}"#;
        assert!(TrainedModel::from_json(bad).is_err());
    }

    #[test]
    fn clamp_bounds_predictions() {
        let (x, y) = data(20, 3);
        let spec = ModelSpec::Svr { c: 100.0, epsilon: 0.1, kernel: crate::regress::Kernel::Linear };
        let m = TrainedModel::fit(&spec, &x, &y, 0, &TrainOptions::default()).unwrap().with_clamp(12.0, 14.0);
        assert!(m.predict(&x).unwrap().iter().all(|v| (12.0..=14.0).contains(v)));
    }

    #[test]
    fn svr_fits_standardized_linear_data() {
        let (x, y) = data(40, 4);
        let spec = ModelSpec::Svr { c: 1000.0, epsilon: 0.01, kernel: crate::regress::Kernel::Linear };
        let m = TrainedModel::fit(&spec, &x, &y, 0, &TrainOptions::default()).unwrap();
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 0.05);
        }
    }
}
