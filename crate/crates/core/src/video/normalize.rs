use crate::dataset::{LandmarkFrame, LandmarkTrack, Point, Timeline};
use crate::error::{Error, Result};

/// Landmark indices in the 0-based 68-point scheme.
pub mod idx {
    pub const JAW: usize = 8;
    pub const INNER_EYE_RIGHT: usize = 39;
    pub const INNER_EYE_LEFT: usize = 42;
    pub const MOUTH_CORNER_RIGHT: usize = 48;
    pub const UPPER_LIP_MID: usize = 51;
    pub const MOUTH_CORNER_LEFT: usize = 54;
    pub const LOWER_LIP_MID: usize = 57;
    /// Outer lip contour, in drawing order.
    pub const OUTER_LIP: std::ops::RangeInclusive<usize> = 48..=59;
}

/// Landmark track expressed in intercanthal units: per frame the inner eye
/// corners sit at `(-0.5, 0, 0)` and `(0.5, 0, 0)` up to depth.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTrack {
    frames: Vec<LandmarkFrame>,
    frame_rate: f64,
}

impl NormalizedTrack {
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

    /// Frames `range` as a new track.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            frames: self.frames[range].to_vec(),
            frame_rate: self.frame_rate,
        }
    }

    #[cfg(test)]
    pub(crate) fn from_frames(frames: Vec<LandmarkFrame>, frame_rate: f64) -> Self {
        Self { frames, frame_rate }
    }

    /// Per-frame coordinate `axis` (0 = x, 1 = y, 2 = z) of one landmark.
    pub fn coordinate(&self, landmark: usize, axis: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f[landmark][axis]).collect()
    }
}

impl Timeline for NormalizedTrack {
    fn rate(&self) -> f64 {
        self.frame_rate
    }

    fn count(&self) -> usize {
        self.frames.len()
    }

    fn sub_range(&self, range: std::ops::Range<usize>) -> Self {
        self.slice(range)
    }
}

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Translates the intercanthal midpoint to the origin, rotates about z so
/// the eye-corner axis is horizontal, and scales by the inverse
/// intercanthal distance.
pub fn normalize_frame(frame: &LandmarkFrame) -> Option<LandmarkFrame> {
    let r = frame[idx::INNER_EYE_RIGHT];
    let l = frame[idx::INNER_EYE_LEFT];
    let d = distance(&r, &l);
    if !(d > 1e-12) {
        return None;
    }
    let mid = [(r[0] + l[0]) / 2.0, (r[1] + l[1]) / 2.0, (r[2] + l[2]) / 2.0];
    let theta = (l[1] - r[1]).atan2(l[0] - r[0]);
    let (s, c) = theta.sin_cos();
    let mut out = [[0.0; 3]; 68];
    for (o, p) in out.iter_mut().zip(frame) {
        let x = p[0] - mid[0];
        let y = p[1] - mid[1];
        let z = p[2] - mid[2];
        *o = [(c * x + s * y) / d, (-s * x + c * y) / d, z / d];
    }
    Some(out)
}

pub fn normalize_track(track: &LandmarkTrack) -> Result<NormalizedTrack> {
    let frames = track
        .frames()
        .iter()
        .enumerate()
        .map(|(k, f)| {
            normalize_frame(f).ok_or_else(|| {
                Error::Degenerate(format!("frame {k}: inner eye corners coincide"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedTrack {
        frames,
        frame_rate: track.frame_rate(),
    })
}
