//! Dataset manifest: one JSON document listing every subject, their
//! clinician ratings and the files belonging to each recording.
//!
//! ```json
//! {
//!   "reference": "buy bobby a puppy",
//!   "subjects": [
//!     {
//!       "id": "S01",
//!       "group": "ALS",
//!       "scores": [[1, 2, 1, 1, 2], [2, 2, 1, 1, 1]],
//!       "recordings": [
//!         {
//!           "audio_wav": "S01/audio.wav",
//!           "landmarks_csv": "S01/landmarks.csv",
//!           "annotations_csv": "S01/annotations.csv",
//!           "transcripts_txt": "S01/transcript.txt",
//!           "frame_rate": 30.0
//!         }
//!       ]
//!     }
//!   ]
//! }
//! ```
//!
//! Relative paths are resolved against the directory holding the manifest.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::types::{Group, SubjectRecord, N_SUBSCORES};
use crate::error::{Error, Result};

/// Sentence every repetition is scored against for word error rate.
pub const DEFAULT_REFERENCE: &str = "buy bobby a puppy";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub reference: String,
    pub subjects: Vec<SubjectEntry>,
    base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectEntry {
    pub record: SubjectRecord,
    pub recordings: Vec<Recording>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recording {
    pub audio_wav: Option<String>,
    pub landmarks_csv: Option<String>,
    pub annotations_csv: Option<String>,
    pub transcripts_txt: Option<String>,
    /// Video frame rate in Hz; required when `landmarks_csv` is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_rate: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    #[serde(default)]
    reference: Option<String>,
    subjects: Option<Vec<RawSubject>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubject {
    id: Option<String>,
    group: Option<String>,
    scores: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    recordings: Vec<Recording>,
}

#[derive(Serialize)]
struct ManifestOut<'a> {
    reference: &'a str,
    subjects: Vec<SubjectOut<'a>>,
}

#[derive(Serialize)]
struct SubjectOut<'a> {
    id: &'a str,
    group: Group,
    scores: &'a [[u8; N_SUBSCORES]; 2],
    recordings: &'a [Recording],
}

impl DatasetManifest {
    pub fn new(reference: impl Into<String>, subjects: Vec<SubjectEntry>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let manifest = Self {
            reference: reference.into(),
            subjects,
            base_dir: base_dir.into(),
        };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Parses a manifest from JSON text. `base_dir` anchors relative paths.
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>, context: &str) -> Result<Self> {
        let raw: RawManifest = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        let subjects = raw
            .subjects
            .ok_or_else(|| Error::Validation(format!("{context}: missing `subjects` array")))?;
        let mut entries = Vec::with_capacity(subjects.len());
        for (i, raw) in subjects.into_iter().enumerate() {
            entries.push(convert_subject(i, raw, context)?);
        }
        Self::new(
            raw.reference.unwrap_or_else(|| DEFAULT_REFERENCE.to_string()),
            entries,
            base_dir,
        )
    }

    /// Pretty-printed JSON with a fixed field order and trailing newline.
    pub fn to_json(&self) -> String {
        let out = ManifestOut {
            reference: &self.reference,
            subjects: self
                .subjects
                .iter()
                .map(|s| SubjectOut {
                    id: &s.record.subject_id,
                    group: s.record.group,
                    scores: s.record.rater_scores(),
                    recordings: &s.recordings,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&out).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Resolves a manifest path entry against the manifest directory.
    pub fn resolve(&self, entry: &str) -> PathBuf {
        let p = Path::new(entry);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.subjects {
            let id = &entry.record.subject_id;
            if id.is_empty() {
                return Err(Error::Validation("subject id must not be empty".into()));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!("duplicate subject id {id:?}")));
            }
            let mut audio = 0;
            let mut video = 0;
            for (r, rec) in entry.recordings.iter().enumerate() {
                if rec.audio_wav.is_some() {
                    audio += 1;
                }
                if rec.landmarks_csv.is_some() {
                    video += 1;
                    match rec.frame_rate {
                        Some(fr) if fr.is_finite() && fr > 0.0 => {}
                        _ => {
                            return Err(Error::Validation(format!(
                                "subject {id}, recording {r}: landmarks require a positive frame_rate"
                            )))
                        }
                    }
                }
            }
            if audio > 1 || video > 1 {
                return Err(Error::Validation(format!(
                    "subject {id}: at most one recording per modality is supported"
                )));
            }
        }
        Ok(())
    }
}

fn convert_subject(i: usize, raw: RawSubject, context: &str) -> Result<SubjectEntry> {
    let field = |name: &str| format!("{context}: subjects[{i}].{name}");
    let id = raw
        .id
        .ok_or_else(|| Error::Validation(format!("{} is required", field("id"))))?;
    let group: Group = raw
        .group
        .ok_or_else(|| Error::Validation(format!("{} is required", field("group"))))?
        .parse()
        .map_err(|e: Error| Error::Validation(format!("{}: {e}", field("group"))))?;
    let scores = raw
        .scores
        .ok_or_else(|| Error::Validation(format!("{} is required", field("scores"))))?;
    if scores.len() != 2 || scores.iter().any(|r| r.len() != N_SUBSCORES) {
        return Err(Error::Validation(format!(
            "{} must be two arrays of {N_SUBSCORES} integers",
            field("scores")
        )));
    }
    let mut rater_scores = [[0u8; N_SUBSCORES]; 2];
    for (r, row) in scores.iter().enumerate() {
        for (k, &s) in row.iter().enumerate() {
            if !(1..=5).contains(&s) {
                return Err(Error::Validation(format!(
                    "{}[{r}][{k}] = {s} is outside [1, 5]",
                    field("scores")
                )));
            }
            rater_scores[r][k] = s as u8;
        }
    }
    Ok(SubjectEntry {
        record: SubjectRecord::new(id, group, rater_scores)?,
        recordings: raw.recordings,
    })
}

/// Reads and validates a manifest. Referenced files are not opened.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    DatasetManifest::from_json(&text, base, &path.display().to_string())
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    fs::write(path, manifest.to_json()).map_err(|e| Error::io(path, e))
}
