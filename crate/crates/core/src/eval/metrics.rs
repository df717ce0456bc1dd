use serde::Serialize;

use super::loso::FoldResult;
use crate::dataset::{Group, Modality};
use crate::error::{Error, Result};
use crate::regress::ModelFamily;

/// Root mean squared error over (truth, prediction) pairs.
pub fn subject_rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset("RMSE of an empty prediction set".into()));
    }
    let mse = pairs.iter().map(|(t, p)| (t - p) * (t - p)).sum::<f64>() / pairs.len() as f64;
    Ok(mse.sqrt())
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Sample SD over mean; undefined for fewer than two values.
pub fn coefficient_of_variation(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let m = mean(v)?;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (m != 0.0).then(|| var.sqrt() / m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectScore {
    pub subject_id: String,
    pub group: Group,
    pub n_reps: usize,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub modality: Modality,
    pub family: ModelFamily,
    pub subjects: Vec<SubjectScore>,
    pub mrmse: f64,
    pub mrmse_als: Option<f64>,
    pub mrmse_hc: Option<f64>,
    pub cv_als: Option<f64>,
    pub cv_hc: Option<f64>,
    pub folds: Vec<FoldResult>,
}

impl EvaluationReport {
    pub fn rmse_of(&self, subject_id: &str) -> Option<f64> {
        self.subjects.iter().find(|s| s.subject_id == subject_id).map(|s| s.rmse)
    }
}

/// Per-subject RMSEs and their unweighted group summaries.
pub fn aggregate_metrics(folds: Vec<FoldResult>, modality: Modality, family: ModelFamily) -> Result<EvaluationReport> {
    if folds.is_empty() {
        return Err(Error::EmptyDataset("no folds to aggregate".into()));
    }
    let subjects = folds
        .iter()
        .map(|f| {
            let pairs: Vec<(f64, f64)> = f.predictions.iter().map(|p| (p.y_true, p.y_pred)).collect();
            Ok(SubjectScore {
                subject_id: f.subject_id.clone(),
                group: f.group,
                n_reps: pairs.len(),
                rmse: subject_rmse(&pairs)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let of = |g: Option<Group>| -> Vec<f64> {
        subjects.iter().filter(|s| g.is_none_or(|g| s.group == g)).map(|s| s.rmse).collect()
    };
    let (als, hc) = (of(Some(Group::Als)), of(Some(Group::Hc)));
    Ok(EvaluationReport {
        modality,
        family,
        mrmse: mean(&of(None)).expect("non-empty"),
        mrmse_als: mean(&als),
        mrmse_hc: mean(&hc),
        cv_als: coefficient_of_variation(&als),
        cv_hc: coefficient_of_variation(&hc),
        subjects,
        folds,
    })
}
