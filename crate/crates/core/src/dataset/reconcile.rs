//! Turns per-repetition feature extractions into modeled instances.

use std::collections::BTreeMap;
use std::fmt;

use super::types::{Group, Modality, SubjectRecord};
use crate::audio::AUDIO_FEATURE_NAMES;
use crate::error::{Error, Result};
use crate::features::FeatureRow;
use crate::video::VIDEO_FEATURE_NAMES;

/// Outcome of extracting one modality for one repetition: a (possibly
/// incomplete) feature row, or the reason nothing could be computed.
pub type Extracted<const N: usize> = std::result::Result<FeatureRow<N>, String>;

/// Everything extracted for one subject, keyed by 1-based repetition.
#[derive(Debug, Clone)]
pub struct SubjectFeatures {
    pub record: SubjectRecord,
    pub audio: BTreeMap<u32, Extracted<18>>,
    pub video: BTreeMap<u32, Extracted<15>>,
}

impl SubjectFeatures {
    pub fn new(record: SubjectRecord) -> Self {
        Self { record, audio: BTreeMap::new(), video: BTreeMap::new() }
    }
}

/// One modeled repetition. Only the features of the reconciled modality
/// are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub subject_id: String,
    pub group: Group,
    pub rep: u32,
    pub audio: Option<[f64; 18]>,
    pub video: Option<[f64; 15]>,
    pub target: f64,
}

impl Instance {
    /// Audio features followed by video features.
    pub fn features(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(33);
        if let Some(a) = &self.audio {
            v.extend_from_slice(a);
        }
        if let Some(x) = &self.video {
            v.extend_from_slice(x);
        }
        v
    }
}

/// Names of the feature columns used for `modality`, in model order.
pub fn feature_names(modality: Modality) -> Vec<&'static str> {
    match modality {
        Modality::Audio => AUDIO_FEATURE_NAMES.to_vec(),
        Modality::Video => VIDEO_FEATURE_NAMES.to_vec(),
        Modality::Multimodal => AUDIO_FEATURE_NAMES.iter().chain(&VIDEO_FEATURE_NAMES).copied().collect(),
    }
}

/// A repetition that was annotated but not modeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub subject_id: String,
    pub rep: u32,
    pub modality: Modality,
    pub reason: String,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\trep {}\t{}", self.modality, self.subject_id, self.rep, self.reason)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Reconciled {
    pub instances: Vec<Instance>,
    pub exclusions: Vec<Exclusion>,
}

pub const TEMPLATE_REASON: &str = "repetition 1 is the DTW template";

fn usable<const N: usize>(e: Option<&Extracted<N>>, label: &str) -> std::result::Result<[f64; N], String> {
    match e {
        None => Err(format!("no {label} recording")),
        Some(Err(reason)) => Err(format!("{label}: {reason}")),
        Some(Ok(row)) => row.complete().ok_or_else(|| {
            let notes = row.notes().join("; ");
            format!("{label} features missing [{}]: {notes}", row.missing().join(","))
        }),
    }
}

/// Builds the instances of one modality. Every annotated repetition of the
/// involved modalities becomes either an instance or an [`Exclusion`].
/// Repetition 1 is never modeled. Multimodal instances are the
/// repetitions with complete features in both modalities.
pub fn reconcile_instances(subjects: &[SubjectFeatures], modality: Modality) -> Result<Reconciled> {
    let mut out = Reconciled::default();
    for s in subjects {
        let id = s.record.subject_id.as_str();
        let reps: Vec<u32> = match modality {
            Modality::Audio => s.audio.keys().copied().collect(),
            Modality::Video => s.video.keys().copied().collect(),
            Modality::Multimodal => {
                if s.audio.is_empty() || s.video.is_empty() {
                    let missing = if s.audio.is_empty() { "audio" } else { "video" };
                    log::debug!("{id}: no {missing} recording, absent from multimodal");
                }
                let mut r: Vec<u32> = s.audio.keys().chain(s.video.keys()).copied().collect();
                r.sort_unstable();
                r.dedup();
                r
            }
        };
        for rep in reps {
            let exclude = |reason: String| Exclusion { subject_id: id.to_string(), rep, modality, reason };
            if rep == 1 {
                out.exclusions.push(exclude(TEMPLATE_REASON.into()));
                continue;
            }
            let audio = matches!(modality, Modality::Audio | Modality::Multimodal)
                .then(|| usable(s.audio.get(&rep), "audio"));
            let video = matches!(modality, Modality::Video | Modality::Multimodal)
                .then(|| usable(s.video.get(&rep), "video"));
            let reasons: Vec<String> = [
                audio.as_ref().and_then(|r| r.as_ref().err().cloned()),
                video.as_ref().and_then(|r| r.as_ref().err().cloned()),
            ]
            .into_iter()
            .flatten()
            .collect();
            if !reasons.is_empty() {
                out.exclusions.push(exclude(reasons.join(" | ")));
                continue;
            }
            out.instances.push(Instance {
                subject_id: id.to_string(),
                group: s.record.group,
                rep,
                audio: audio.map(|r| r.expect("checked above")),
                video: video.map(|r| r.expect("checked above")),
                target: s.record.target(),
            });
        }
    }
    if out.instances.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no {modality} instances after reconciliation ({} exclusion(s))",
            out.exclusions.len()
        )));
    }
    Ok(out)
}
