use serde::{Deserialize, Serialize};

use super::dtw::dtw_distance;
use super::envelope::{detect_pauses, PauseConfig};
use super::hnr::hnr_mean;
use super::mfcc::{mfcc, MfccConfig};
use super::perturbation::{extract_periods, jitter_metrics, shimmer_metrics};
use super::pitch::{estimate_pitch, PitchConfig, PitchTrack};
use super::wer::word_error_rate;
use crate::dataset::{AudioClip, RepetitionSpan};
use crate::error::{Error, Result};
use crate::features::FeatureRow;
use crate::matrix::Matrix;

/// Canonical order of the acoustic features.
pub const AUDIO_FEATURE_NAMES: [&str; 18] = [
    "f0_mean",
    "f0_sd",
    "f0_median",
    "f0_min",
    "f0_max",
    "f0_range",
    "jitter_local",
    "jitter_rap",
    "jitter_ppq5",
    "shimmer_local",
    "shimmer_apq3",
    "shimmer_apq5",
    "hnr_mean",
    "sentence_duration_s",
    "inter_sentence_duration_s",
    "pause_duration_s",
    "wer",
    "dtw_to_template",
];

pub type AudioFeatures = FeatureRow<18>;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    pub pitch: PitchConfig,
    pub pause: PauseConfig,
    pub mfcc: MfccConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Stats {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
}

/// Summary statistics over voiced-frame F0 values. The SD is the sample
/// standard deviation (0 for a single voiced frame).
pub fn f0_stats(pitch: &PitchTrack) -> Result<F0Stats> {
    let mut v: Vec<f64> = pitch.voiced_f0().collect();
    if v.is_empty() {
        return Err(Error::MissingFeature("no voiced frames for F0 statistics".into()));
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    Ok(F0Stats {
        mean,
        sd,
        median,
        min: v[0],
        max: v[n - 1],
        range: v[n - 1] - v[0],
    })
}

/// Everything about a repetition that its waveform alone cannot tell.
#[derive(Debug, Clone, Copy)]
pub struct AudioContext<'a> {
    pub span: RepetitionSpan,
    /// Offset of the previous repetition, when there is one.
    pub previous_offset_s: Option<f64>,
    /// MFCC of the subject's first repetition.
    pub template_mfcc: Option<&'a Matrix>,
    /// ASR hypothesis for this repetition.
    pub transcript: Option<&'a str>,
    pub reference: &'a str,
}

/// Computes the 18 acoustic features of one repetition (index >= 2).
/// Features that cannot be computed are left missing with a note.
pub fn audio_features(
    segment: &AudioClip,
    ctx: &AudioContext<'_>,
    cfg: &AudioConfig,
) -> Result<AudioFeatures> {
    if ctx.span.index < 2 {
        return Err(Error::Validation(
            "repetition 1 is the DTW template and has no feature vector".into(),
        ));
    }
    let mut f = AudioFeatures::empty(&AUDIO_FEATURE_NAMES);

    match estimate_pitch(segment, &cfg.pitch) {
        Ok(pitch) => voice_quality(segment, &pitch, &mut f),
        Err(e) => {
            for name in &AUDIO_FEATURE_NAMES[..13] {
                f.set_missing(name, &e);
            }
        }
    }

    f.set("sentence_duration_s", ctx.span.duration_s());
    match ctx.previous_offset_s {
        Some(prev) => f.set("inter_sentence_duration_s", (ctx.span.onset_s - prev).max(0.0)),
        None => f.set_missing("inter_sentence_duration_s", "no preceding repetition"),
    }
    match detect_pauses(segment, &cfg.pause) {
        Ok(p) => f.set("pause_duration_s", p),
        Err(e) => f.set_missing("pause_duration_s", e),
    }
    match ctx.transcript {
        Some(hyp) => match word_error_rate(ctx.reference, hyp) {
            Ok(w) => f.set("wer", w),
            Err(e) => f.set_missing("wer", e),
        },
        None => f.set_missing("wer", "no transcript line"),
    }
    match ctx.template_mfcc {
        Some(template) => match mfcc(segment, &cfg.mfcc).and_then(|m| dtw_distance(template, &m)) {
            Ok(d) => f.set("dtw_to_template", d),
            Err(e) => f.set_missing("dtw_to_template", e),
        },
        None => f.set_missing("dtw_to_template", "no template repetition"),
    }
    Ok(f)
}

fn voice_quality(segment: &AudioClip, pitch: &PitchTrack, f: &mut AudioFeatures) {
    match f0_stats(pitch) {
        Ok(s) => {
            f.set("f0_mean", s.mean);
            f.set("f0_sd", s.sd);
            f.set("f0_median", s.median);
            f.set("f0_min", s.min);
            f.set("f0_max", s.max);
            f.set("f0_range", s.range);
        }
        Err(e) => {
            for name in ["f0_mean", "f0_sd", "f0_median", "f0_min", "f0_max", "f0_range"] {
                f.set_missing(name, &e);
            }
        }
    }
    match extract_periods(segment, pitch) {
        Ok(ps) => {
            let groups = [
                (jitter_metrics(&ps), ["jitter_local", "jitter_rap", "jitter_ppq5"]),
                (shimmer_metrics(&ps), ["shimmer_local", "shimmer_apq3", "shimmer_apq5"]),
            ];
            for (metrics, names) in groups {
                match metrics {
                    Ok(m) => {
                        f.set(names[0], m.local);
                        for (name, v) in names[1..].iter().zip([m.three_point, m.five_point]) {
                            match v {
                                Some(v) => f.set(name, v),
                                None => f.set_missing(name, "too few cycles"),
                            }
                        }
                    }
                    Err(e) => {
                        for name in names {
                            f.set_missing(name, &e);
                        }
                    }
                }
            }
        }
        Err(e) => {
            for name in &AUDIO_FEATURE_NAMES[6..12] {
                f.set_missing(name, &e);
            }
        }
    }
    match hnr_mean(segment, pitch) {
        Ok(h) => f.set("hnr_mean", h),
        Err(e) => f.set_missing("hnr_mean", e),
    }
}
