//! Regression models, feature standardization and hyperparameter grids.

pub mod gbt;
pub mod grid;
pub mod mlp;
pub mod model;
pub mod standardize;
pub mod svr;

pub use gbt::{train_gbt, GbtModel, GbtParams};
pub use grid::{enumerate_grid, smoke_grid, GbtGrid, MlpGrid, ModelFamily, ModelSpec, SvrGrid};
pub use mlp::{train_mlp, Activation, MlpModel, MlpSettings};
pub use model::{ModelState, TrainOptions, TrainedModel, MODEL_FORMAT_VERSION};
pub use standardize::Standardizer;
pub use svr::{train_svr, Kernel, SvrModel, SvrSettings};
