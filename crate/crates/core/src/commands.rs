//! The `features`, `evaluate`, `stats`, `synth` and `validate` commands.
//! Computation finishes before any file is written, and all writes happen
//! from the calling thread.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::dataset::{
    load_annotations, load_audio, load_landmarks, load_manifest, load_transcripts, reconcile_instances, span_range,
    DatasetManifest, Modality, Reconciled, SubjectFeatures,
};
use crate::error::{Error, Result};
use crate::eval::{aggregate_metrics, friedman_test, nested_loso, EvaluationReport, FriedmanResult, LosoOptions};
use crate::pipeline::extract_features;
use crate::regress::ModelFamily;
use crate::report;
use crate::synth::{synth_cohort, SynthCohort, SynthParams};

pub const AUDIO_FEATURES_FILE: &str = "features_audio.csv";
pub const VIDEO_FEATURES_FILE: &str = "features_video.csv";
pub const EXCLUSIONS_FILE: &str = "exclusions.log";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const SCATTER_FILE: &str = "figure_scatter.svg";
pub const FRIEDMAN_FILE: &str = "friedman.csv";

fn manifest_of(cfg: &RunConfig) -> Result<DatasetManifest> {
    let path = cfg
        .manifest
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("no manifest given (--manifest or `manifest` in the config)".into()))?;
    load_manifest(path)
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
            Ok(p)
        })
        .collect()
}

fn needs(modalities: &[Modality], m: Modality) -> bool {
    modalities.contains(&m) || modalities.contains(&Modality::Multimodal)
}

fn feature_files(modalities: &[Modality], subjects: &[SubjectFeatures]) -> Vec<(String, String)> {
    let mut files = Vec::new();
    if needs(modalities, Modality::Audio) {
        files.push((AUDIO_FEATURES_FILE.to_string(), report::audio_features_csv(subjects)));
    }
    if needs(modalities, Modality::Video) {
        files.push((VIDEO_FEATURES_FILE.to_string(), report::video_features_csv(subjects)));
    }
    files
}

fn modalities_in_order(cfg: &RunConfig) -> Vec<Modality> {
    Modality::ALL.into_iter().filter(|m| cfg.modalities.contains(m)).collect()
}

fn models_in_order(cfg: &RunConfig) -> Vec<ModelFamily> {
    ModelFamily::ALL.into_iter().filter(|f| cfg.models.contains(f)).collect()
}

#[derive(Debug)]
pub struct FeaturesOutcome {
    pub subjects: Vec<SubjectFeatures>,
    pub reconciled: Vec<(Modality, Reconciled)>,
    pub files: Vec<PathBuf>,
}

/// Extracts features and writes the feature tables and the exclusion log.
/// A modality with no usable instance is reported but is not an error here.
pub fn run_features(cfg: &RunConfig) -> Result<FeaturesOutcome> {
    cfg.validate()?;
    let manifest = manifest_of(cfg)?;
    let subjects = extract_features(&manifest, &cfg.audio)?;
    let modalities = modalities_in_order(cfg);
    let mut reconciled = Vec::new();
    for &m in &modalities {
        match reconcile_instances(&subjects, m) {
            Ok(r) => reconciled.push((m, r)),
            Err(Error::EmptyDataset(msg)) => log::warn!("{msg}"),
            Err(e) => return Err(e),
        }
    }
    let mut files = feature_files(&modalities, &subjects);
    let refs: Vec<(Modality, &Reconciled)> = reconciled.iter().map(|(m, r)| (*m, r)).collect();
    files.push((EXCLUSIONS_FILE.to_string(), report::exclusions_log(&refs)));
    let files = write_all(&cfg.out, &files)?;
    Ok(FeaturesOutcome { subjects, reconciled, files })
}

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub reports: Vec<EvaluationReport>,
    pub files: Vec<PathBuf>,
}

/// Runs nested LOSO for every requested (modality, model) pair and writes
/// the per-condition reports, summary, predictions, scatter figure of the
/// best condition, feature tables and exclusion log.
pub fn run_evaluate(cfg: &RunConfig) -> Result<EvaluateOutcome> {
    cfg.validate()?;
    let manifest = manifest_of(cfg)?;
    let subjects = extract_features(&manifest, &cfg.audio)?;
    let modalities = modalities_in_order(cfg);
    let families = models_in_order(cfg);
    let opts = LosoOptions { seed: cfg.seed, train: cfg.train, clamp: cfg.clamp() };

    let mut reconciled = Vec::new();
    let mut reports = Vec::new();
    for &m in &modalities {
        let r = reconcile_instances(&subjects, m)?;
        let n_subjects = r.instances.iter().map(|i| i.subject_id.as_str()).collect::<BTreeSet<_>>().len();
        if n_subjects < 3 {
            return Err(Error::InsufficientSubjects { required: 3, found: n_subjects });
        }
        for &family in &families {
            let grid = cfg.grid.specs(family);
            log::info!("{m} / {family}: {} instances, {n_subjects} subjects, {} grid points", r.instances.len(), grid.len());
            let folds = nested_loso(&r.instances, &grid, &opts)?;
            let report = aggregate_metrics(folds, m, family)?;
            log::info!("{m} / {family}: mRMSE {:.4}", report.mrmse);
            reports.push(report);
        }
        reconciled.push((m, r));
    }

    let mut files = feature_files(&modalities, &subjects);
    let refs: Vec<(Modality, &Reconciled)> = reconciled.iter().map(|(m, r)| (*m, r)).collect();
    files.push((EXCLUSIONS_FILE.to_string(), report::exclusions_log(&refs)));
    for r in &reports {
        files.push((report::report_file_name(r.modality, r.family), report::report_csv(r)));
    }
    files.push((SUMMARY_FILE.to_string(), report::summary_csv(&reports)));
    files.push((PREDICTIONS_FILE.to_string(), report::predictions_csv(&reports)));
    // The first condition with the lowest mRMSE gets the figure.
    let best = reports
        .iter()
        .reduce(|a, b| if b.mrmse < a.mrmse { b } else { a })
        .expect("at least one condition");
    let title = format!("{} / {}: mRMSE {:.3}", best.modality, best.family, best.mrmse);
    files.push((SCATTER_FILE.to_string(), report::scatter_svg(&report::scatter_points(best), &title)?));
    let files = write_all(&cfg.out, &files)?;
    Ok(EvaluateOutcome { reports, files })
}

#[derive(Debug)]
pub struct StatsOutcome {
    pub result: FriedmanResult,
    pub conditions: Vec<String>,
    pub subjects: Vec<String>,
    pub file: PathBuf,
}

/// Friedman test over the subject RMSEs of every `report_<modality>_<model>.csv`
/// in `dir`. Blocks are the subjects present in all conditions.
pub fn run_stats(dir: &Path) -> Result<StatsOutcome> {
    let mut conditions: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
    for m in Modality::ALL {
        for f in ModelFamily::ALL {
            let path = dir.join(report::report_file_name(m, f));
            if !path.exists() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let rows = report::parse_report_csv(&text, &path.display().to_string())?;
            conditions.push((format!("{m}/{f}"), rows.into_iter().collect()));
        }
    }
    if conditions.len() < 2 {
        return Err(Error::Validation(format!(
            "{}: found {} report file(s), the Friedman test needs at least 2 conditions",
            dir.display(),
            conditions.len()
        )));
    }
    let common: Vec<String> = conditions[0]
        .1
        .keys()
        .filter(|id| conditions.iter().all(|(_, c)| c.contains_key(*id)))
        .cloned()
        .collect();
    if common.len() < 2 {
        return Err(Error::InsufficientSubjects { required: 2, found: common.len() });
    }
    let blocks: Vec<Vec<f64>> = common.iter().map(|id| conditions.iter().map(|(_, c)| c[id]).collect()).collect();
    let result = friedman_test(&blocks)?;
    let names: Vec<String> = conditions.into_iter().map(|(n, _)| n).collect();
    let file = write_all(dir, &[(FRIEDMAN_FILE.to_string(), report::friedman_csv(&result, &names, &common))])?
        .pop()
        .expect("one file");
    Ok(StatsOutcome { result, conditions: names, subjects: common, file })
}

pub fn run_synth(params: &SynthParams, out: &Path) -> Result<SynthCohort> {
    synth_cohort(params, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidationSummary {
    pub subjects: usize,
    pub recordings: usize,
    pub repetitions: usize,
}

/// Opens and parses every file the manifest references and checks that the
/// annotated spans fit the media they annotate.
pub fn run_validate(manifest_path: &Path) -> Result<ValidationSummary> {
    let manifest = load_manifest(manifest_path)?;
    let mut summary = ValidationSummary { subjects: manifest.subjects.len(), ..Default::default() };
    for entry in &manifest.subjects {
        for rec in &entry.recordings {
            summary.recordings += 1;
            let spans = match rec.annotations_csv.as_deref() {
                Some(p) => load_annotations(&manifest.resolve(p))?,
                None if rec.audio_wav.is_some() || rec.landmarks_csv.is_some() => {
                    return Err(Error::Validation(format!(
                        "subject {}: recording has media but no annotations_csv",
                        entry.record.subject_id
                    )))
                }
                None => Vec::new(),
            };
            summary.repetitions += spans.len();
            let outside = |path: &Path, e: Error| Error::Validation(format!("{}: {e}", path.display()));
            if let Some(p) = rec.audio_wav.as_deref() {
                let path = manifest.resolve(p);
                let clip = load_audio(&path)?;
                for s in &spans {
                    span_range(&clip, s).map_err(|e| outside(&path, e))?;
                }
            }
            if let Some(p) = rec.landmarks_csv.as_deref() {
                let path = manifest.resolve(p);
                let track = load_landmarks(&path, rec.frame_rate.unwrap_or(30.0))?;
                for s in &spans {
                    span_range(&track, s).map_err(|e| outside(&path, e))?;
                }
            }
            if let Some(p) = rec.transcripts_txt.as_deref() {
                let path = manifest.resolve(p);
                let lines = load_transcripts(&path)?;
                if let Some(max) = spans.iter().map(|s| s.index as usize).max() {
                    if lines.len() < max {
                        log::warn!("{}: {} line(s) for {max} repetitions", path.display(), lines.len());
                    }
                }
            }
        }
    }
    Ok(summary)
}
