//! A symmetric reference face in the 68-point layout, with helpers for
//! mirroring and for articulating the mouth and jaw. Coordinates are in
//! image pixels (y grows downward); the intercanthal distance is 36.

use crate::dataset::{LandmarkFrame, N_LANDMARKS};

/// Index of the landmark mirrored across the mid-sagittal plane.
pub const MIRROR: [usize; N_LANDMARKS] = {
    let mut m = [0usize; N_LANDMARKS];
    let mut i = 0;
    while i < N_LANDMARKS {
        m[i] = match i {
            0..=16 => 16 - i,
            17..=26 => 43 - i,
            27..=30 => i,
            31..=35 => 66 - i,
            36..=39 => 81 - i,
            40 => 47,
            41 => 46,
            42..=45 => 81 - i,
            46 => 41,
            47 => 40,
            48..=54 => 102 - i,
            55..=59 => 114 - i,
            60..=64 => 124 - i,
            65..=67 => 132 - i,
            _ => i,
        };
        i += 1;
    }
    m
};

pub fn neutral_face() -> LandmarkFrame {
    let mut f = [[0.0; 3]; N_LANDMARKS];
    for (i, p) in f.iter_mut().enumerate().take(17) {
        let t = std::f64::consts::PI * i as f64 / 16.0;
        *p = [-70.0 * t.cos(), -10.0 + 75.0 * t.sin(), 0.0];
    }
    let brow = [(-55.0, -44.0), (-46.0, -49.0), (-36.0, -51.0), (-26.0, -50.0), (-16.0, -47.0)];
    for (k, &(x, y)) in brow.iter().enumerate() {
        f[17 + k] = [x, y, 0.0];
        f[26 - k] = [-x, y, 0.0];
    }
    for k in 0..4 {
        f[27 + k] = [0.0, -30.0 + 10.0 * k as f64, 0.0];
    }
    for k in 0..5 {
        f[31 + k] = [-12.0 + 6.0 * k as f64, 8.0, 0.0];
    }
    let right_eye = [(-42.0, -30.0), (-34.0, -35.0), (-26.0, -35.0), (-18.0, -30.0), (-26.0, -25.0), (-34.0, -25.0)];
    for (k, &(x, y)) in right_eye.iter().enumerate() {
        f[36 + k] = [x, y, 0.0];
    }
    for i in 42..48 {
        let m = f[MIRROR[i]];
        f[i] = [-m[0], m[1], 0.0];
    }
    let outer = [
        (-25.0, 30.0),
        (-15.0, 25.0),
        (-6.0, 22.0),
        (0.0, 23.0),
        (6.0, 22.0),
        (15.0, 25.0),
        (25.0, 30.0),
        (15.0, 37.0),
        (6.0, 40.0),
        (0.0, 40.0),
        (-6.0, 40.0),
        (-15.0, 37.0),
    ];
    for (k, &(x, y)) in outer.iter().enumerate() {
        f[48 + k] = [x, y, 0.0];
    }
    let inner = [(-20.0, 30.0), (-7.0, 27.0), (0.0, 27.0), (7.0, 27.0), (20.0, 30.0), (7.0, 33.0), (0.0, 33.0), (-7.0, 33.0)];
    for (k, &(x, y)) in inner.iter().enumerate() {
        f[60 + k] = [x, y, 0.0];
    }
    // Shallow depth relief: nose forward, face edges back.
    for p in f.iter_mut() {
        p[2] = 0.004 * p[0] * p[0];
    }
    for p in f.iter_mut().take(36).skip(27) {
        p[2] -= 12.0;
    }
    f
}

/// Reflects a frame across the vertical line `x = 0` and relabels
/// landmarks so left and right keep their anatomical meaning.
pub fn mirror_frame(frame: &LandmarkFrame) -> LandmarkFrame {
    let mut out = [[0.0; 3]; N_LANDMARKS];
    for (i, o) in out.iter_mut().enumerate() {
        let p = frame[MIRROR[i]];
        *o = [-p[0], p[1], p[2]];
    }
    out
}

/// Opens the mouth by `opening` pixels: the lower lip and jaw move down,
/// the corners follow partly and draw inward by `corner_in` pixels each
/// (`corner_in.0` right, `.1` left).
pub fn articulate(frame: &LandmarkFrame, opening: f64, corner_in: (f64, f64)) -> LandmarkFrame {
    let mut f = *frame;
    for (i, w) in [(55, 0.75), (56, 0.95), (57, 1.0), (58, 0.95), (59, 0.75), (65, 0.9), (66, 1.0), (67, 0.9)] {
        f[i][1] += w * opening;
    }
    for i in 4..=12 {
        let w = 1.2 - 0.2 * (i as f64 - 8.0).abs();
        f[i][1] += w * opening;
    }
    for i in [50, 51, 52, 61, 62, 63] {
        f[i][1] -= 0.1 * opening;
    }
    f[48][1] += 0.3 * opening;
    f[54][1] += 0.3 * opening;
    f[60][1] += 0.3 * opening;
    f[64][1] += 0.3 * opening;
    f[48][0] += corner_in.0;
    f[60][0] += corner_in.0;
    f[54][0] -= corner_in.1;
    f[64][0] -= corner_in.1;
    f
}
