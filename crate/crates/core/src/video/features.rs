use super::geometry::{mouth_geometry, MouthGeometry};
use super::kinematics::{corner_correlation, cumulative_path, jerk_rms, velocity_extrema};
use super::normalize::{idx, NormalizedTrack};
use crate::dataset::{span_range, RepetitionSpan};
use crate::error::{Error, Result};
use crate::features::FeatureRow;

/// Canonical order of the facial-kinematic features.
pub const VIDEO_FEATURE_NAMES: [&str; 15] = [
    "path_lower_lip",
    "path_jaw",
    "mouth_area_mean_rel",
    "mouth_area_range_rel",
    "vel_width_max",
    "vel_width_min",
    "vel_lower_lip_max",
    "vel_lower_lip_min",
    "vel_jaw_max",
    "vel_jaw_min",
    "jaw_jerk_rms",
    "lr_area_absdiff",
    "corner_corr",
    "ecc_mean",
    "ecc_range",
];

pub type VideoFeatures = FeatureRow<15>;

/// Frames used for the rest reference when no frame lies outside the spans.
const FALLBACK_REST_FRAMES: usize = 5;

/// Mouth geometry of the face at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestReference {
    pub area: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median mouth area over all frames outside every span, or over the first
/// few frames when the spans cover the whole track.
pub fn rest_reference(track: &NormalizedTrack, spans: &[RepetitionSpan]) -> Result<RestReference> {
    if track.is_empty() {
        return Err(Error::TooShort("empty landmark track".into()));
    }
    let fr = track.frame_rate();
    let inside = |k: usize| {
        let t = k as f64 / fr;
        spans.iter().any(|s| t >= s.onset_s && t < s.offset_s)
    };
    let mut areas: Vec<f64> = (0..track.len())
        .filter(|&k| !inside(k))
        .map(|k| mouth_geometry(&track.frames()[k]).area)
        .collect();
    if areas.is_empty() {
        areas = track.frames()[..track.len().min(FALLBACK_REST_FRAMES)]
            .iter()
            .map(|f| mouth_geometry(f).area)
            .collect();
    }
    Ok(RestReference { area: median(areas) })
}

/// Normalized frames belonging to one repetition.
pub fn segment_track(track: &NormalizedTrack, span: &RepetitionSpan) -> Result<NormalizedTrack> {
    Ok(track.slice(span_range(track, span)?))
}

/// Computes the 15 kinematic features of one repetition segment.
pub fn video_features(segment: &NormalizedTrack, rest: &RestReference) -> Result<VideoFeatures> {
    if segment.len() < 4 {
        return Err(Error::TooShort(format!(
            "{} frame(s), video features need at least 4",
            segment.len()
        )));
    }
    let fr = segment.frame_rate();
    let mut f = VideoFeatures::empty(&VIDEO_FEATURE_NAMES);

    f.set("path_lower_lip", cumulative_path(segment, idx::LOWER_LIP_MID)?);
    f.set("path_jaw", cumulative_path(segment, idx::JAW)?);

    let geo: Vec<MouthGeometry> = segment.frames().iter().map(mouth_geometry).collect();
    let crossed = geo.iter().filter(|g| g.self_intersecting).count();
    if crossed > 0 {
        log::warn!("{crossed} frame(s) with a self-intersecting lip contour; using absolute areas");
    }
    let n = geo.len() as f64;
    let area: Vec<f64> = geo.iter().map(|g| g.area).collect();
    let (amin, amax) = min_max(&area);
    f.set("mouth_area_mean_rel", area.iter().sum::<f64>() / n - rest.area);
    f.set("mouth_area_range_rel", amax - amin);

    let width: Vec<f64> = geo.iter().map(|g| g.width).collect();
    let lower = segment.coordinate(idx::LOWER_LIP_MID, 1);
    let jaw = segment.coordinate(idx::JAW, 1);
    for (signal, names) in [
        (&width, ["vel_width_max", "vel_width_min"]),
        (&lower, ["vel_lower_lip_max", "vel_lower_lip_min"]),
        (&jaw, ["vel_jaw_max", "vel_jaw_min"]),
    ] {
        let (max, min) = velocity_extrema(signal, fr)?;
        f.set(names[0], max);
        f.set(names[1], min);
    }
    f.set("jaw_jerk_rms", jerk_rms(&jaw, fr)?);

    f.set(
        "lr_area_absdiff",
        geo.iter().map(|g| (g.area_right - g.area_left).abs()).sum::<f64>() / n,
    );
    match corner_correlation(segment) {
        Ok(r) => f.set("corner_corr", r),
        Err(e) => f.set_missing("corner_corr", e),
    }
    let ecc: Vec<f64> = geo.iter().map(|g| g.eccentricity).collect();
    let (emin, emax) = min_max(&ecc);
    f.set("ecc_mean", ecc.iter().sum::<f64>() / n);
    f.set("ecc_range", emax - emin);
    Ok(f)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}
