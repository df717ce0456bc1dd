//! Manifest → per-subject feature extraction.

use rayon::prelude::*;

use crate::audio::{audio_features, mfcc, AudioConfig, AudioContext};
use crate::dataset::{
    load_annotations, load_audio, load_landmarks, load_transcripts, slice_spans, DatasetManifest, Recording,
    RepetitionSpan, SubjectEntry, SubjectFeatures, TEMPLATE_REASON,
};
use crate::error::{Error, Result};
use crate::video::{normalize_track, rest_reference, segment_track, video_features};

/// Extracts audio and video features for every subject, in manifest order.
/// Unreadable or malformed files abort extraction; per-repetition failures
/// are recorded in the result and surface later as exclusions.
pub fn extract_features(manifest: &DatasetManifest, cfg: &AudioConfig) -> Result<Vec<SubjectFeatures>> {
    let results: Vec<Result<SubjectFeatures>> = manifest
        .subjects
        .par_iter()
        .map(|entry| extract_subject(manifest, entry, cfg))
        .collect();
    results.into_iter().collect()
}

pub fn extract_subject(manifest: &DatasetManifest, entry: &SubjectEntry, cfg: &AudioConfig) -> Result<SubjectFeatures> {
    let mut out = SubjectFeatures::new(entry.record.clone());
    let id = &entry.record.subject_id;
    for rec in &entry.recordings {
        if rec.audio_wav.is_none() && rec.landmarks_csv.is_none() {
            continue;
        }
        let spans = recording_spans(manifest, rec, id)?;
        if rec.audio_wav.is_some() {
            extract_audio(manifest, rec, &spans, &manifest.reference, cfg, &mut out)?;
        }
        if rec.landmarks_csv.is_some() {
            extract_video(manifest, rec, &spans, &mut out)?;
        }
    }
    log::debug!("{id}: {} audio / {} video repetitions", out.audio.len(), out.video.len());
    Ok(out)
}

fn recording_spans(manifest: &DatasetManifest, rec: &Recording, id: &str) -> Result<Vec<RepetitionSpan>> {
    let path = rec
        .annotations_csv
        .as_deref()
        .ok_or_else(|| Error::Validation(format!("subject {id}: recording has media but no annotations_csv")))?;
    let mut spans = load_annotations(&manifest.resolve(path))?;
    spans.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
    Ok(spans)
}

fn extract_audio(
    manifest: &DatasetManifest,
    rec: &Recording,
    spans: &[RepetitionSpan],
    reference: &str,
    cfg: &AudioConfig,
    out: &mut SubjectFeatures,
) -> Result<()> {
    let path = manifest.resolve(rec.audio_wav.as_deref().expect("caller checked"));
    let clip = load_audio(&path)?;
    let segments = slice_spans(&clip, spans).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let transcripts = match rec.transcripts_txt.as_deref() {
        Some(t) => Some(load_transcripts(&manifest.resolve(t))?),
        None => None,
    };
    let template = spans
        .iter()
        .position(|s| s.index == 1)
        .map(|k| mfcc(&segments[k], &cfg.mfcc));
    let template = match template {
        Some(Ok(m)) => Some(m),
        Some(Err(e)) => {
            log::warn!("{}: template repetition unusable: {e}", path.display());
            None
        }
        None => None,
    };

    for (k, (span, segment)) in spans.iter().zip(&segments).enumerate() {
        if span.index == 1 {
            out.audio.insert(1, Err(TEMPLATE_REASON.into()));
            continue;
        }
        let transcript = transcripts
            .as_ref()
            .and_then(|t| t.get(span.index as usize - 1))
            .map(String::as_str);
        let ctx = AudioContext {
            span: *span,
            previous_offset_s: k.checked_sub(1).map(|p| spans[p].offset_s),
            template_mfcc: template.as_ref(),
            transcript,
            reference,
        };
        let row = audio_features(segment, &ctx, cfg).map_err(|e| e.to_string());
        if let Ok(r) = &row {
            if !r.is_complete() {
                log::debug!("{}: rep {} incomplete: {}", path.display(), span.index, r.missing_reason());
            }
        }
        out.audio.insert(span.index, row);
    }
    Ok(())
}

fn extract_video(
    manifest: &DatasetManifest,
    rec: &Recording,
    spans: &[RepetitionSpan],
    out: &mut SubjectFeatures,
) -> Result<()> {
    let path = manifest.resolve(rec.landmarks_csv.as_deref().expect("caller checked"));
    let frame_rate = rec
        .frame_rate
        .ok_or_else(|| Error::Validation(format!("{}: frame_rate is required", path.display())))?;
    let track = load_landmarks(&path, frame_rate)?;
    let normalized = match normalize_track(&track) {
        Ok(n) => n,
        Err(e) => {
            log::warn!("{}: {e}", path.display());
            for span in spans {
                out.video.insert(span.index, Err(format!("normalization failed: {e}")));
            }
            return Ok(());
        }
    };
    let rest = rest_reference(&normalized, spans);
    for span in spans {
        if span.index == 1 {
            out.video.insert(1, Err(TEMPLATE_REASON.into()));
            continue;
        }
        let row = match &rest {
            Ok(rest) => segment_track(&normalized, span)
                .and_then(|seg| video_features(&seg, rest))
                .map_err(|e| e.to_string()),
            Err(e) => Err(format!("no rest reference: {e}")),
        };
        out.video.insert(span.index, row);
    }
    Ok(())
}
