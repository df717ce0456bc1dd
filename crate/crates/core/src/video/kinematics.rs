use super::normalize::{distance, idx, NormalizedTrack};
use crate::error::{Error, Result};

/// Sum of frame-to-frame displacements of one landmark.
pub fn cumulative_path(track: &NormalizedTrack, landmark: usize) -> Result<f64> {
    if track.len() < 2 {
        return Err(Error::TooShort(format!(
            "{} frame(s), a path needs at least 2",
            track.len()
        )));
    }
    Ok(track
        .frames()
        .windows(2)
        .map(|w| distance(&w[0][landmark], &w[1][landmark]))
        .sum())
}

/// `order`-th forward difference scaled by `frame_rate^order`.
pub fn derivative(signal: &[f64], frame_rate: f64, order: u32) -> Result<Vec<f64>> {
    if signal.len() < order as usize + 1 {
        return Err(Error::TooShort(format!(
            "{} frame(s), order-{order} difference needs {}",
            signal.len(),
            order + 1
        )));
    }
    let mut d = signal.to_vec();
    for _ in 0..order {
        d = d.windows(2).map(|w| (w[1] - w[0]) * frame_rate).collect();
    }
    Ok(d)
}

/// Largest and smallest signed first derivative.
pub fn velocity_extrema(signal: &[f64], frame_rate: f64) -> Result<(f64, f64)> {
    let v = derivative(signal, frame_rate, 1)?;
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((max, min))
}

/// Root mean square of the third derivative.
pub fn jerk_rms(signal: &[f64], frame_rate: f64) -> Result<f64> {
    let j = derivative(signal, frame_rate, 3)?;
    Ok((j.iter().map(|v| v * v).sum::<f64>() / j.len() as f64).sqrt())
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    // Relative guard: speeds that are constant up to rounding count as static.
    let scale = a.iter().chain(b).map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if saa <= 1e-24 * scale || sbb <= 1e-24 * scale {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation between the per-frame speeds of the right and left
/// mouth corners.
pub fn corner_correlation(track: &NormalizedTrack) -> Result<f64> {
    if track.len() < 3 {
        return Err(Error::TooShort(format!(
            "{} frame(s), corner correlation needs at least 3",
            track.len()
        )));
    }
    let speeds = |lm: usize| -> Vec<f64> {
        track
            .frames()
            .windows(2)
            .map(|w| distance(&w[0][lm], &w[1][lm]))
            .collect()
    };
    pearson(&speeds(idx::MOUTH_CORNER_RIGHT), &speeds(idx::MOUTH_CORNER_LEFT))
        .ok_or_else(|| Error::MissingFeature("a mouth corner does not move".into()))
}
