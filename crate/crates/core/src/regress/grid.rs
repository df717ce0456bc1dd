use std::fmt;

use serde::{Deserialize, Serialize};

use super::mlp::Activation;
use super::svr::Kernel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Svr,
    Mlp,
    Gbt,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Svr, ModelFamily::Mlp, ModelFamily::Gbt];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::Svr => "svr",
            ModelFamily::Mlp => "mlp",
            ModelFamily::Gbt => "gbt",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svr" => Ok(ModelFamily::Svr),
            "mlp" => Ok(ModelFamily::Mlp),
            "gbt" | "xgb" => Ok(ModelFamily::Gbt),
            _ => Err(Error::InvalidArgument(format!("unknown model family {s:?}"))),
        }
    }
}

/// One point of a hyperparameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Svr {
        c: f64,
        epsilon: f64,
        kernel: Kernel,
    },
    Mlp {
        layers: Vec<usize>,
        learning_rate: f64,
        activation: Activation,
    },
    Gbt {
        n_estimators: usize,
        max_depth: usize,
        learning_rate: f64,
        subsample: f64,
        colsample_bytree: f64,
    },
}

impl ModelSpec {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Svr { .. } => ModelFamily::Svr,
            ModelSpec::Mlp { .. } => ModelFamily::Mlp,
            ModelSpec::Gbt { .. } => ModelFamily::Gbt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ModelSpec::Svr { c, epsilon, .. } => *c > 0.0 && *epsilon >= 0.0,
            ModelSpec::Mlp { layers, learning_rate, .. } => {
                !layers.is_empty() && !layers.contains(&0) && *learning_rate > 0.0
            }
            ModelSpec::Gbt { max_depth, learning_rate, subsample, colsample_bytree, .. } => {
                *max_depth >= 1
                    && *learning_rate > 0.0
                    && *subsample > 0.0
                    && *subsample <= 1.0
                    && *colsample_bytree > 0.0
                    && *colsample_bytree <= 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid model spec {self}")))
        }
    }
}

/// Compact `key=value` rendering used in reports.
impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Svr { c, epsilon, kernel } => {
                write!(f, "C={c};epsilon={epsilon};kernel={}", kernel.as_str())
            }
            ModelSpec::Mlp { layers, learning_rate, activation } => {
                let l: Vec<String> = layers.iter().map(usize::to_string).collect();
                write!(f, "layers={};lr={learning_rate};activation={}", l.join("-"), activation.as_str())
            }
            ModelSpec::Gbt { n_estimators, max_depth, learning_rate, subsample, colsample_bytree } => write!(
                f,
                "n_estimators={n_estimators};max_depth={max_depth};lr={learning_rate};subsample={subsample};colsample_bytree={colsample_bytree}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub kernel: Vec<Kernel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpGrid {
    pub layers: Vec<Vec<usize>>,
    pub learning_rate: Vec<f64>,
    pub activation: Vec<Activation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbtGrid {
    pub n_estimators: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub subsample: Vec<f64>,
    pub colsample_bytree: Vec<f64>,
}

const FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 1.0];

impl SvrGrid {
    pub fn full() -> Self {
        Self {
            c: vec![0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0],
            epsilon: vec![0.01, 0.1, 0.5, 1.0],
            kernel: Kernel::ALL.to_vec(),
        }
    }

    pub fn smoke() -> Self {
        Self { c: vec![1.0, 10.0, 100.0, 1000.0], epsilon: vec![0.1], kernel: vec![Kernel::Linear, Kernel::Rbf] }
    }

    pub fn specs(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for &c in &self.c {
            for &epsilon in &self.epsilon {
                for &kernel in &self.kernel {
                    out.push(ModelSpec::Svr { c, epsilon, kernel });
                }
            }
        }
        out
    }
}

impl MlpGrid {
    pub fn full() -> Self {
        let layers = [
            &[10, 50][..],
            &[10, 30, 100],
            &[10, 50, 100],
            &[10, 50, 200],
            &[10, 100, 100],
            &[10, 100, 200],
            &[50, 10],
            &[100, 30, 10],
            &[100, 50, 10],
            &[200, 50, 10],
            &[100, 100, 10],
            &[200, 100, 10],
        ];
        Self {
            layers: layers.iter().map(|l| l.to_vec()).collect(),
            learning_rate: vec![0.0001, 0.001, 0.01],
            activation: Activation::ALL.to_vec(),
        }
    }

    pub fn smoke() -> Self {
        Self { layers: vec![vec![10, 50]], learning_rate: vec![0.001, 0.01], activation: vec![Activation::Relu] }
    }

    pub fn specs(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for layers in &self.layers {
            for &learning_rate in &self.learning_rate {
                for &activation in &self.activation {
                    out.push(ModelSpec::Mlp { layers: layers.clone(), learning_rate, activation });
                }
            }
        }
        out
    }
}

impl GbtGrid {
    pub fn full() -> Self {
        Self {
            n_estimators: vec![2, 3, 4, 5],
            max_depth: vec![3, 4, 5, 6, 8],
            learning_rate: vec![0.001, 0.05, 0.01, 0.1, 0.15, 0.3],
            subsample: FRACTIONS.to_vec(),
            colsample_bytree: FRACTIONS.to_vec(),
        }
    }

    pub fn smoke() -> Self {
        Self {
            n_estimators: vec![5],
            max_depth: vec![3],
            learning_rate: vec![0.15, 0.3],
            subsample: vec![1.0],
            colsample_bytree: vec![1.0],
        }
    }

    pub fn specs(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for &n_estimators in &self.n_estimators {
            for &max_depth in &self.max_depth {
                for &learning_rate in &self.learning_rate {
                    for &subsample in &self.subsample {
                        for &colsample_bytree in &self.colsample_bytree {
                            out.push(ModelSpec::Gbt { n_estimators, max_depth, learning_rate, subsample, colsample_bytree });
                        }
                    }
                }
            }
        }
        out
    }
}

/// The full search grid of a model family, in nested-loop order of its
/// parameter lists.
pub fn enumerate_grid(family: ModelFamily) -> Vec<ModelSpec> {
    match family {
        ModelFamily::Svr => SvrGrid::full().specs(),
        ModelFamily::Mlp => MlpGrid::full().specs(),
        ModelFamily::Gbt => GbtGrid::full().specs(),
    }
}

/// Reduced grid for quick runs and tests.
pub fn smoke_grid(family: ModelFamily) -> Vec<ModelSpec> {
    match family {
        ModelFamily::Svr => SvrGrid::smoke().specs(),
        ModelFamily::Mlp => MlpGrid::smoke().specs(),
        ModelFamily::Gbt => GbtGrid::smoke().specs(),
    }
}
