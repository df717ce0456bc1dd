//! Frame-wise pitch estimation by normalized autocorrelation.
//!
//! Each frame is mean-removed and the normalized cross-correlation
//! between the frame and its lagged copy is evaluated for every lag in
//! `[sr / f0_ceiling, sr / f0_floor]`. The chosen peak is the shortest-lag
//! local maximum reaching 95% of the strongest one, which keeps harmonic
//! multiples of the period from winning on strongly periodic input. The
//! peak is refined by parabolic interpolation.

use serde::{Deserialize, Serialize};

use super::envelope::frame_geometry;
use crate::dataset::AudioClip;
use crate::error::{Error, Result};

const OCTAVE_GUARD: f64 = 0.8;
/// Voiced neighbours on each side consulted when correcting octave jumps.
const OCTAVE_CONTEXT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchConfig {
    pub f0_floor: f64,
    pub f0_ceiling: f64,
    pub window_s: f64,
    pub hop_s: f64,
    pub voicing_threshold: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f0_floor: 75.0,
            f0_ceiling: 500.0,
            window_s: 0.040,
            hop_s: 0.010,
            voicing_threshold: 0.45,
        }
    }
}

impl PitchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f0_floor > 0.0 && self.f0_floor < self.f0_ceiling) {
            return Err(Error::InvalidArgument(format!(
                "pitch floor {} must be positive and below ceiling {}",
                self.f0_floor, self.f0_ceiling
            )));
        }
        if self.window_s < 2.0 / self.f0_floor - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "pitch window {} s shorter than two periods of the floor",
                self.window_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    /// Centre of each analysis frame, in seconds.
    pub frame_times: Vec<f64>,
    /// Fundamental frequency in Hz, `None` for unvoiced frames.
    pub f0: Vec<Option<f64>>,
    /// Interpolated autocorrelation peak per frame (0 when no peak).
    pub strength: Vec<f64>,
    pub(crate) window: usize,
    pub(crate) hop: usize,
    pub(crate) sample_rate: u32,
}

impl PitchTrack {
    pub fn voiced(&self) -> Vec<bool> {
        self.f0.iter().map(Option::is_some).collect()
    }

    pub fn voiced_f0(&self) -> impl Iterator<Item = f64> + '_ {
        self.f0.iter().filter_map(|f| *f)
    }

    pub fn n_voiced(&self) -> usize {
        self.f0.iter().filter(|f| f.is_some()).count()
    }

    /// Sample range `[start, end)` analysed by frame `k`.
    pub fn frame_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = k * self.hop;
        start..start + self.window
    }
}

/// Mean-removed copy of a frame.
pub(crate) fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Normalized correlation between `x[..n - lag]` and `x[lag..]`.
pub(crate) fn nccf(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    let a = &x[..x.len() - lag];
    let b = &x[lag..];
    let mut num = 0.0;
    let mut ea = 0.0;
    let mut eb = 0.0;
    for (u, v) in a.iter().zip(b) {
        num += u * v;
        ea += u * u;
        eb += v * v;
    }
    let den = (ea * eb).sqrt();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Vertex of the parabola through `(-1, a), (0, b), (1, c)`:
/// returns `(offset, value)`.
pub(crate) fn parabolic_peak(a: f64, b: f64, c: f64) -> (f64, f64) {
    let den = a - 2.0 * b + c;
    if den >= 0.0 || !den.is_finite() {
        return (0.0, b);
    }
    let delta = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
    (delta, b - 0.25 * (a - c) * delta)
}

pub(crate) struct FramePitch {
    pub lag: f64,
    pub strength: f64,
}

pub(crate) fn frame_pitch(frame: &[f64], min_lag: usize, max_lag: usize) -> Option<FramePitch> {
    let x = centered(frame);
    let lo = min_lag.saturating_sub(1).max(1);
    let hi = (max_lag + 1).min(x.len().saturating_sub(1));
    if hi <= lo + 1 {
        return None;
    }
    let r: Vec<f64> = (lo..=hi).map(|lag| nccf(&x, lag)).collect();
    let at = |lag: usize| r[lag - lo];
    let mut peaks: Vec<usize> = Vec::new();
    for lag in min_lag.max(lo + 1)..=max_lag.min(hi - 1) {
        if at(lag) > at(lag - 1) && at(lag) >= at(lag + 1) && at(lag) > 0.0 {
            peaks.push(lag);
        }
    }
    let best = peaks.iter().map(|&l| at(l)).fold(f64::NEG_INFINITY, f64::max);
    let lag = *peaks.iter().find(|&&l| at(l) >= OCTAVE_GUARD * best)?;
    let (delta, strength) = parabolic_peak(at(lag - 1), at(lag), at(lag + 1));
    Some(FramePitch {
        lag: lag as f64 + delta,
        strength,
    })
}

/// Moves single-frame octave errors back to the octave of the surrounding
/// voiced run: a frame at about half or double the median of its voiced
/// neighbours is doubled or halved.
fn correct_octave_jumps(f0: &mut [Option<f64>], floor: f64, ceiling: f64) {
    let original = f0.to_vec();
    for k in 0..f0.len() {
        let Some(f) = original[k] else { continue };
        let mut around: Vec<f64> = Vec::with_capacity(2 * OCTAVE_CONTEXT);
        for j in (0..k).rev().take(OCTAVE_CONTEXT).map_while(|j| original[j]) {
            around.push(j);
        }
        for j in original[k + 1..].iter().take(OCTAVE_CONTEXT).map_while(|v| *v) {
            around.push(j);
        }
        if around.len() < 2 {
            continue;
        }
        around.sort_by(f64::total_cmp);
        let n = around.len();
        let median = if n % 2 == 1 { around[n / 2] } else { 0.5 * (around[n / 2 - 1] + around[n / 2]) };
        let ratio = f / median;
        let fixed = if (0.4..0.6).contains(&ratio) {
            2.0 * f
        } else if (1.7..2.3).contains(&ratio) {
            0.5 * f
        } else {
            continue;
        };
        if (floor..=ceiling).contains(&fixed) {
            f0[k] = Some(fixed);
        }
    }
}

pub fn estimate_pitch(clip: &AudioClip, cfg: &PitchConfig) -> Result<PitchTrack> {
    cfg.validate()?;
    let (window, hop) = frame_geometry(clip.sample_rate(), cfg.window_s, cfg.hop_s)?;
    let sr = f64::from(clip.sample_rate());
    let min_lag = ((sr / cfg.f0_ceiling).ceil() as usize).max(2);
    let max_lag = (sr / cfg.f0_floor).floor() as usize;
    let x = clip.samples();
    let n_frames = if x.len() >= window {
        (x.len() - window) / hop + 1
    } else {
        0
    };
    let mut track = PitchTrack {
        frame_times: Vec::with_capacity(n_frames),
        f0: Vec::with_capacity(n_frames),
        strength: Vec::with_capacity(n_frames),
        window,
        hop,
        sample_rate: clip.sample_rate(),
    };
    for k in 0..n_frames {
        let start = k * hop;
        track
            .frame_times
            .push((start as f64 + window as f64 / 2.0) / sr);
        let (f0, strength) = match frame_pitch(&x[start..start + window], min_lag, max_lag) {
            Some(p) => {
                let f = sr / p.lag;
                let voiced = p.strength >= cfg.voicing_threshold
                    && f >= cfg.f0_floor
                    && f <= cfg.f0_ceiling;
                (voiced.then_some(f), p.strength)
            }
            None => (None, 0.0),
        };
        track.f0.push(f0);
        track.strength.push(strength);
    }
    correct_octave_jumps(&mut track.f0, cfg.f0_floor, cfg.f0_ceiling);
    Ok(track)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tone(freq: f64, seconds: f64, amp: f64) -> AudioClip {
        let n = (seconds * 16000.0) as usize;
        AudioClip::new(
            (0..n).map(|k| amp * (2.0 * PI * freq * k as f64 / 16000.0).sin()).collect(),
            16000,
        )
        .unwrap()
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

    #[test]
    fn tone_200hz_all_voiced() {
        let track = estimate_pitch(&tone(200.0, 0.5, 0.8), &PitchConfig::default()).unwrap();
        assert!(!track.f0.is_empty());
        for f in &track.f0 {
            let f = f.expect("voiced");
            assert!((f - 200.0).abs() <= 1.0, "{f}");
        }
    }

    #[test]
    fn pure_tones_within_one_percent() {
        for freq in [100.0, 150.0, 200.0, 300.0, 400.0] {
            let track = estimate_pitch(&tone(freq, 0.5, 0.5), &PitchConfig::default()).unwrap();
            let m = median(track.voiced_f0().collect());
            assert!((m - freq).abs() / freq < 0.01, "{freq}: {m}");
        }
    }

    #[test]
    fn white_noise_mostly_unvoiced() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..16000).map(|_| rng.random_range(-0.5..0.5)).collect();
            let track =
                estimate_pitch(&AudioClip::new(x, 16000).unwrap(), &PitchConfig::default()).unwrap();
            let unvoiced = track.f0.iter().filter(|f| f.is_none()).count();
            assert!(unvoiced as f64 >= 0.9 * track.f0.len() as f64, "seed {seed}: {unvoiced}");
        }
    }

    #[test]
    fn tone_below_floor_is_unvoiced() {
        let track = estimate_pitch(&tone(50.0, 0.5, 0.5), &PitchConfig::default()).unwrap();
        assert_eq!(track.n_voiced(), 0);
    }

    #[test]
    fn silence_is_unvoiced() {
        let clip = AudioClip::new(vec![0.0; 8000], 16000).unwrap();
        let track = estimate_pitch(&clip, &PitchConfig::default()).unwrap();
        assert_eq!(track.n_voiced(), 0);
    }

    #[test]
    fn frame_times_increase() {
        let track = estimate_pitch(&tone(120.0, 0.3, 0.5), &PitchConfig::default()).unwrap();
        assert!(track.frame_times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = PitchConfig { f0_floor: 300.0, f0_ceiling: 200.0, ..Default::default() };
        assert!(estimate_pitch(&tone(100.0, 0.2, 0.5), &cfg).is_err());
        let cfg = PitchConfig { window_s: 0.01, ..Default::default() };
        assert!(estimate_pitch(&tone(100.0, 0.2, 0.5), &cfg).is_err());
    }

    #[test]
    fn parabola_vertex() {
        let (d, v) = parabolic_peak(0.0, 1.0, 0.0);
        assert_eq!((d, v), (0.0, 1.0));
        // y = 1 - (x - 0.25)^2 sampled at -1, 0, 1
        let f = |x: f64| 1.0 - (x - 0.25) * (x - 0.25);
        let (d, v) = parabolic_peak(f(-1.0), f(0.0), f(1.0));
        assert!((d - 0.25).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_octave_jumps_are_corrected() {
        let mut f0 = vec![None, Some(150.0), Some(151.0), Some(75.5), Some(149.0), Some(300.0), Some(150.5), None, Some(80.0)];
        correct_octave_jumps(&mut f0, 75.0, 500.0);
        assert_eq!(f0[3], Some(151.0));
        assert_eq!(f0[5], Some(150.0));
        assert_eq!(f0[1], Some(150.0));
        // Isolated voiced frames have no context and are left alone.
        assert_eq!(f0[8], Some(80.0));
    }
}
