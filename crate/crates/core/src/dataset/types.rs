use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of landmarks in the facial landmark scheme.
pub const N_LANDMARKS: usize = 68;

/// Sub-scores per rater: symmetry, range of motion, speed, variability, fatigue.
pub const N_SUBSCORES: usize = 5;

/// A single landmark coordinate `[x, y, z]`.
pub type Point = [f64; 3];

/// All landmarks of one video frame.
pub type LandmarkFrame = [Point; N_LANDMARKS];

/// Mono waveform with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Validation("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::Validation(format!(
                "sample {i} is {} (must be finite and within [-1, 1])",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Multiplies every sample by `gain`; fails if a result leaves `[-1, 1]`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }
}

/// Per-frame 68-point landmark coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkTrack {
    frames: Vec<LandmarkFrame>,
    frame_rate: f64,
}

impl LandmarkTrack {
    pub fn new(frames: Vec<LandmarkFrame>, frame_rate: f64) -> Result<Self> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(Error::Validation(format!(
                "frame rate must be positive, got {frame_rate}"
            )));
        }
        for (f, frame) in frames.iter().enumerate() {
            if let Some(i) = frame.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
                return Err(Error::Validation(format!(
                    "frame {f}, landmark {i}: non-finite coordinate"
                )));
            }
        }
        Ok(Self { frames, frame_rate })
    }

    pub fn frames(&self) -> &[LandmarkFrame] {
        &self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Onset/offset of one sentence repetition, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSpan {
    /// 1-based repetition number.
    pub index: u32,
    pub onset_s: f64,
    pub offset_s: f64,
}

impl RepetitionSpan {
    pub fn duration_s(&self) -> f64 {
        self.offset_s - self.onset_s
    }
}

/// Checks that spans are well formed, sorted by onset and mutually disjoint.
pub fn validate_spans(spans: &[RepetitionSpan]) -> Result<()> {
    for span in spans {
        if !(span.onset_s.is_finite() && span.offset_s.is_finite()) || span.onset_s < 0.0 {
            return Err(Error::Validation(format!(
                "repetition {}: invalid times [{}, {})",
                span.index, span.onset_s, span.offset_s
            )));
        }
        if span.onset_s >= span.offset_s {
            return Err(Error::Validation(format!(
                "repetition {}: onset {} is not before offset {}",
                span.index, span.onset_s, span.offset_s
            )));
        }
    }
    for pair in spans.windows(2) {
        if pair[1].onset_s < pair[0].offset_s {
            return Err(Error::Validation(format!(
                "repetitions {} and {} overlap or are out of order",
                pair[0].index, pair[1].index
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "ALS")]
    Als,
    #[serde(rename = "HC")]
    Hc,
}

impl Group {
    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Als => "ALS",
            Group::Hc => "HC",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ALS" => Ok(Group::Als),
            "HC" => Ok(Group::Hc),
            other => Err(Error::Validation(format!(
                "group must be \"ALS\" or \"HC\", got {other:?}"
            ))),
        }
    }
}

/// Identity, group and clinician ratings of one participant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub group: Group,
    rater_scores: [[u8; N_SUBSCORES]; 2],
}

impl SubjectRecord {
    pub fn new(
        subject_id: impl Into<String>,
        group: Group,
        rater_scores: [[u8; N_SUBSCORES]; 2],
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        for (r, scores) in rater_scores.iter().enumerate() {
            if let Some(s) = scores.iter().find(|s| !(1..=5).contains(*s)) {
                return Err(Error::Validation(format!(
                    "subject {subject_id}: rater {} sub-score {s} outside [1, 5]",
                    r + 1
                )));
            }
        }
        Ok(Self {
            subject_id,
            group,
            rater_scores,
        })
    }

    pub fn rater_scores(&self) -> &[[u8; N_SUBSCORES]; 2] {
        &self.rater_scores
    }

    /// Mean of the two raters' totals, in `[5, 25]`.
    pub fn target(&self) -> f64 {
        let total: u32 = self
            .rater_scores
            .iter()
            .flat_map(|r| r.iter())
            .map(|&s| u32::from(s))
            .sum();
        f64::from(total) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Audio,
    Video,
    Multimodal,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Audio, Modality::Video, Modality::Multimodal];

    pub fn as_str(&self) -> &'static str {
        match self {
            Modality::Audio => "audio",
            Modality::Video => "video",
            Modality::Multimodal => "multimodal",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "audio" => Ok(Modality::Audio),
            "video" => Ok(Modality::Video),
            "multimodal" => Ok(Modality::Multimodal),
            other => Err(Error::InvalidArgument(format!("unknown modality {other:?}"))),
        }
    }
}
