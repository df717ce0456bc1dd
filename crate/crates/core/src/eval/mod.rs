//! Nested leave-one-subject-out evaluation, metrics and rank statistics.

pub mod chi2;
pub mod friedman;
pub mod loso;
pub mod metrics;

pub use chi2::{chi_square_sf, gamma_q, ln_gamma};
pub use friedman::{friedman_test, mid_ranks, FriedmanResult};
pub use loso::{nested_loso, task_seed, FoldResult, LosoOptions, Prediction};
pub use metrics::{aggregate_metrics, coefficient_of_variation, subject_rmse, EvaluationReport, SubjectScore};
