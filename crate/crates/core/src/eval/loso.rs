//! Nested leave-one-subject-out cross-validation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::metrics::subject_rmse;
use crate::dataset::{Group, Instance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::regress::{ModelSpec, Standardizer, TrainOptions, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub rep: u32,
    pub y_true: f64,
    pub y_pred: f64,
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    /// The held-out subject.
    pub subject_id: String,
    pub group: Group,
    pub spec: ModelSpec,
    pub grid_index: usize,
    /// Mean inner per-subject RMSE of the chosen spec.
    pub inner_score: f64,
    /// Standardizer fitted on the outer training split.
    pub standardizer: Standardizer,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LosoOptions {
    pub seed: u64,
    pub train: TrainOptions,
    /// Clamp held-out predictions to this range.
    pub clamp: Option<(f64, f64)>,
}

/// Per-task seed derived from the master seed and task coordinates.
pub fn task_seed(master: u64, fold: usize, grid: usize, inner: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    [fold, grid, inner].iter().fold(mix(master), |h, &v| mix(h ^ v as u64))
}

/// Instances grouped by subject, subjects in lexicographic id order.
struct Cohort {
    x: Matrix,
    y: Vec<f64>,
    ids: Vec<String>,
    groups: Vec<Group>,
    rows: Vec<Vec<usize>>,
}

impl Cohort {
    fn new(instances: &[Instance]) -> Result<Self> {
        let width = instances.first().map_or(0, |i| i.features().len());
        let rows: Vec<Vec<f64>> = instances.iter().map(Instance::features).collect();
        let x = Matrix::from_rows(&rows, width)?;
        let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (k, inst) in instances.iter().enumerate() {
            by_subject.entry(inst.subject_id.as_str()).or_default().push(k);
        }
        let ids: Vec<String> = by_subject.keys().map(|s| s.to_string()).collect();
        let groups = by_subject.values().map(|r| instances[r[0]].group).collect();
        Ok(Self {
            x,
            y: instances.iter().map(|i| i.target).collect(),
            ids,
            groups,
            rows: by_subject.into_values().collect(),
        })
    }

    fn rows_of(&self, subjects: impl Iterator<Item = usize>) -> Vec<usize> {
        subjects.flat_map(|s| self.rows[s].iter().copied()).collect()
    }

    fn split(&self, rows: &[usize]) -> (Matrix, Vec<f64>) {
        (self.x.select_rows(rows), rows.iter().map(|&r| self.y[r]).collect())
    }

    fn fit_and_score(&self, spec: &ModelSpec, train: &[usize], test: &[usize], seed: u64, opts: &TrainOptions) -> Result<f64> {
        let (xt, yt) = self.split(train);
        let model = TrainedModel::fit(spec, &xt, &yt, seed, opts)?;
        let (xv, yv) = self.split(test);
        let pred = model.predict(&xv)?;
        let pairs: Vec<(f64, f64)> = yv.into_iter().zip(pred).collect();
        subject_rmse(&pairs)
    }
}

/// Mean inner per-subject RMSE of `spec` on the subjects other than
/// `outer`; infinite when any inner fit fails.
fn inner_score(c: &Cohort, outer: usize, g: usize, spec: &ModelSpec, opts: &LosoOptions) -> f64 {
    let inner: Vec<usize> = (0..c.ids.len()).filter(|&s| s != outer).collect();
    let mut total = 0.0;
    for (k, &held) in inner.iter().enumerate() {
        let train = c.rows_of(inner.iter().copied().filter(|&s| s != held));
        let seed = task_seed(opts.seed, outer, g, k);
        match c.fit_and_score(spec, &train, &c.rows[held], seed, &opts.train) {
            Ok(r) if r.is_finite() => total += r,
            Ok(_) | Err(_) => return f64::INFINITY,
        }
    }
    total / inner.len() as f64
}

/// Nested LOSO: one outer fold per subject; within it every grid spec is
/// scored by an inner LOSO over the remaining subjects, the best spec
/// (earliest on ties) is refit on all of them and predicts the held-out
/// subject. Results are independent of thread scheduling.
pub fn nested_loso(instances: &[Instance], grid: &[ModelSpec], opts: &LosoOptions) -> Result<Vec<FoldResult>> {
    let c = Cohort::new(instances)?;
    let n = c.ids.len();
    if n < 3 {
        return Err(Error::InsufficientSubjects { required: 3, found: n });
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    let tasks: Vec<(usize, usize)> = (0..n).flat_map(|f| (0..grid.len()).map(move |g| (f, g))).collect();
    let scores: Vec<f64> = tasks.par_iter().map(|&(f, g)| inner_score(&c, f, g, &grid[g], opts)).collect();

    (0..n)
        .into_par_iter()
        .map(|f| {
            let fold_scores = &scores[f * grid.len()..(f + 1) * grid.len()];
            let (best, score) = fold_scores
                .iter()
                .enumerate()
                .fold((usize::MAX, f64::INFINITY), |acc, (g, &s)| if s < acc.1 { (g, s) } else { acc });
            if best == usize::MAX {
                return Err(Error::TrainingFailed(format!(
                    "fold {}: every one of {} grid specs failed",
                    c.ids[f],
                    grid.len()
                )));
            }
            let spec = &grid[best];
            let train = c.rows_of((0..n).filter(|&s| s != f));
            let (xt, yt) = c.split(&train);
            let seed = task_seed(opts.seed, f, best, usize::MAX);
            let mut model = TrainedModel::fit(spec, &xt, &yt, seed, &opts.train)?;
            if let Some((lo, hi)) = opts.clamp {
                model = model.with_clamp(lo, hi);
            }
            let test = &c.rows[f];
            let (xv, yv) = c.split(test);
            let pred = model.predict(&xv)?;
            Ok(FoldResult {
                subject_id: c.ids[f].clone(),
                group: c.groups[f],
                spec: spec.clone(),
                grid_index: best,
                inner_score: score,
                standardizer: model.standardizer.clone(),
                predictions: test
                    .iter()
                    .zip(yv.iter().zip(pred))
                    .map(|(&r, (&y_true, y_pred))| Prediction { rep: instances[r].rep, y_true, y_pred })
                    .collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{smoke_grid, Kernel, ModelFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Targets depend linearly on feature 0 only.
    fn cohort(n_subjects: usize, reps: u32, seed: u64) -> Vec<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut out = Vec::new();
        for s in 0..n_subjects {
            let level: f64 = rng.random_range(0.0..4.0);
            for rep in 2..2 + reps {
                let mut a = [0.0; 18];
                for v in a.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                }
                a[0] = level + noise.sample(&mut rng);
                out.push(Instance {
                    subject_id: format!("s{s:02}"),
                    group: if s % 2 == 0 { Group::Als } else { Group::Hc },
                    rep,
                    audio: Some(a),
                    video: None,
                    target: 5.0 + 4.0 * level,
                });
            }
        }
        out
    }

    #[test]
    fn one_fold_per_subject() {
        let inst = cohort(5, 3, 1);
        let folds = nested_loso(&inst, &smoke_grid(ModelFamily::Svr), &LosoOptions::default()).unwrap();
        assert_eq!(folds.len(), 5);
        let ids: Vec<&str> = folds.iter().map(|f| f.subject_id.as_str()).collect();
        assert_eq!(ids, ["s00", "s01", "s02", "s03", "s04"]);
        assert!(folds.iter().all(|f| f.predictions.len() == 3));
    }

    #[test]
    fn too_few_subjects() {
        let inst = cohort(2, 3, 1);
        assert!(matches!(
            nested_loso(&inst, &smoke_grid(ModelFamily::Svr), &LosoOptions::default()),
            Err(Error::InsufficientSubjects { required: 3, found: 2 })
        ));
    }

    #[test]
    fn held_out_rows_do_not_leak() {
        let inst = cohort(6, 3, 2);
        let grid = smoke_grid(ModelFamily::Svr);
        let base = nested_loso(&inst, &grid, &LosoOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (f, fold) in base.iter().enumerate() {
            let mut poisoned = inst.clone();
            for i in poisoned.iter_mut().filter(|i| i.subject_id == fold.subject_id) {
                for v in i.audio.as_mut().unwrap().iter_mut() {
                    *v = rng.random_range(-1e3..1e3);
                }
            }
            let again = nested_loso(&poisoned, &grid, &LosoOptions::default()).unwrap();
            assert_eq!(again[f].spec, fold.spec);
            assert_eq!(again[f].standardizer, fold.standardizer);
        }
    }

    #[test]
    fn linear_signal_selects_linear_kernel() {
        let inst = cohort(8, 4, 3);
        let folds = nested_loso(&inst, &smoke_grid(ModelFamily::Svr), &LosoOptions::default()).unwrap();
        let linear = folds
            .iter()
            .filter(|f| matches!(f.spec, ModelSpec::Svr { kernel: Kernel::Linear, .. }))
            .count();
        assert!(linear * 10 >= folds.len() * 8, "{linear} of {}", folds.len());
    }

    #[test]
    fn parallel_equals_serial() {
        let inst = cohort(5, 3, 4);
        let grid = smoke_grid(ModelFamily::Gbt);
        let opts = LosoOptions { seed: 11, ..Default::default() };
        let par = nested_loso(&inst, &grid, &opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = pool.install(|| nested_loso(&inst, &grid, &opts)).unwrap();
        for (a, b) in par.iter().zip(&ser) {
            assert_eq!(a.predictions, b.predictions);
            assert_eq!(a.grid_index, b.grid_index);
        }
    }

    #[test]
    fn task_seeds_differ() {
        let s: std::collections::BTreeSet<u64> =
            (0..5).flat_map(|f| (0..5).map(move |g| task_seed(7, f, g, 0))).collect();
        assert_eq!(s.len(), 25);
        assert_ne!(task_seed(7, 0, 0, 0), task_seed(8, 0, 0, 0));
    }
}
