//! Short-time RMS energy, span suggestion from energy minima, and
//! within-sentence pause detection.

use serde::{Deserialize, Serialize};

use crate::dataset::{AudioClip, RepetitionSpan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFrame {
    /// Centre of the analysis window, in seconds.
    pub time_s: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub frames: Vec<EnvelopeFrame>,
    pub window_s: f64,
    pub hop_s: f64,
}

impl Envelope {
    pub fn peak(&self) -> f64 {
        self.frames.iter().map(|f| f.rms).fold(0.0, f64::max)
    }

    fn threshold(&self, rel_db: f64) -> f64 {
        self.peak() * 10f64.powf(rel_db / 20.0)
    }
}

pub(crate) fn frame_geometry(sample_rate: u32, window_s: f64, hop_s: f64) -> Result<(usize, usize)> {
    if !(hop_s > 0.0 && hop_s <= window_s && window_s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < hop ({hop_s}) <= window ({window_s})"
        )));
    }
    let sr = f64::from(sample_rate);
    let window = ((window_s * sr).round() as usize).max(1);
    let hop = ((hop_s * sr).round() as usize).max(1);
    Ok((window, hop))
}

/// RMS over windows of `window_s` advanced by `hop_s`; frame `k` starts
/// at sample `k * hop`.
pub fn rms_envelope(clip: &AudioClip, window_s: f64, hop_s: f64) -> Result<Envelope> {
    let (window, hop) = frame_geometry(clip.sample_rate(), window_s, hop_s)?;
    if clip.len() < window {
        return Err(Error::TooShort(format!(
            "{} samples, one window needs {window}",
            clip.len()
        )));
    }
    let sr = f64::from(clip.sample_rate());
    let x = clip.samples();
    let n_frames = (x.len() - window) / hop + 1;
    let frames = (0..n_frames)
        .map(|k| {
            let start = k * hop;
            let energy: f64 = x[start..start + window].iter().map(|s| s * s).sum();
            EnvelopeFrame {
                time_s: (start as f64 + window as f64 / 2.0) / sr,
                rms: (energy / window as f64).sqrt(),
            }
        })
        .collect();
    Ok(Envelope {
        frames,
        window_s: window as f64 / sr,
        hop_s: hop as f64 / sr,
    })
}

/// Proposes repetition spans from runs of frames louder than
/// `peak + rel_threshold_db`. Runs closer than `min_gap_s` are merged,
/// then runs shorter than `min_speech_s` are dropped. Onsets and offsets
/// are the centres of the first and last loud frames.
pub fn suggest_spans(
    envelope: &Envelope,
    rel_threshold_db: f64,
    min_speech_s: f64,
    min_gap_s: f64,
) -> Vec<RepetitionSpan> {
    let thr = envelope.threshold(rel_threshold_db);
    if envelope.peak() <= 0.0 {
        return Vec::new();
    }
    let frames = &envelope.frames;
    let mut runs: Vec<(f64, f64)> = Vec::new();
    let mut start: Option<usize> = None;
    for (k, f) in frames.iter().enumerate() {
        let loud = f.rms > thr;
        match (loud, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((frames[s].time_s, frames[k - 1].time_s));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((frames[s].time_s, frames[frames.len() - 1].time_s));
    }

    let mut merged: Vec<(f64, f64)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(last) if run.0 - last.1 < min_gap_s => last.1 = run.1,
            _ => merged.push(run),
        }
    }
    merged
        .into_iter()
        .filter(|(on, off)| off > on && off - on >= min_speech_s)
        .enumerate()
        .map(|(i, (onset_s, offset_s))| RepetitionSpan {
            index: i as u32 + 1,
            onset_s,
            offset_s,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PauseConfig {
    pub rel_threshold_db: f64,
    pub min_pause_s: f64,
    pub window_s: f64,
    pub hop_s: f64,
}

impl Default for PauseConfig {
    fn default() -> Self {
        Self {
            rel_threshold_db: -25.0,
            min_pause_s: 0.06,
            window_s: 0.025,
            hop_s: 0.010,
        }
    }
}

/// Total duration of quiet runs lasting at least `min_pause_s` that lie
/// strictly inside the segment. A run of `m` frames lasts
/// `(m - 1) * hop + window`.
pub fn detect_pauses(segment: &AudioClip, cfg: &PauseConfig) -> Result<f64> {
    let (window, _) = frame_geometry(segment.sample_rate(), cfg.window_s, cfg.hop_s)?;
    if segment.len() < window {
        return Ok(0.0);
    }
    let env = rms_envelope(segment, cfg.window_s, cfg.hop_s)?;
    if env.peak() <= 0.0 {
        return Ok(0.0);
    }
    let thr = env.threshold(cfg.rel_threshold_db);
    let quiet: Vec<bool> = env.frames.iter().map(|f| f.rms < thr).collect();
    let n = quiet.len();
    let mut total = 0.0;
    let mut k = 0;
    while k < n {
        if !quiet[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && quiet[k] {
            k += 1;
        }
        let touches_edge = start == 0 || k == n;
        let dur = (k - start - 1) as f64 * env.hop_s + env.window_s;
        if !touches_edge && dur >= cfg.min_pause_s {
            total += dur;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const SR: u32 = 16000;

    fn tone(n: usize, freq: f64, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|k| amp * (2.0 * PI * freq * k as f64 / f64::from(SR)).sin())
            .collect()
    }

    #[test]
    fn constant_signal_rms() {
        let clip = AudioClip::new(vec![0.5; 4000], SR).unwrap();
        let env = rms_envelope(&clip, 0.025, 0.01).unwrap();
        assert!(env.frames.iter().all(|f| (f.rms - 0.5).abs() < 1e-12));
    }

    #[test]
    fn silence_rms_zero() {
        let clip = AudioClip::new(vec![0.0; 4000], SR).unwrap();
        let env = rms_envelope(&clip, 0.025, 0.01).unwrap();
        assert!(env.frames.iter().all(|f| f.rms == 0.0));
    }

    #[test]
    fn sine_rms_over_whole_cycles() {
        // 200 Hz: a 25 ms window holds exactly five cycles.
        let clip = AudioClip::new(tone(8000, 200.0, 1.0), SR).unwrap();
        let env = rms_envelope(&clip, 0.025, 0.01).unwrap();
        for f in &env.frames {
            assert!((f.rms - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        }
    }

    #[test]
    fn too_short_clip() {
        let clip = AudioClip::new(vec![0.0; 100], SR).unwrap();
        assert!(matches!(rms_envelope(&clip, 0.025, 0.01), Err(Error::TooShort(_))));
    }

    #[test]
    fn ten_bursts_give_ten_spans() {
        let burst = 0.4;
        let gap = 0.3;
        let mut x = vec![0.0; (0.2 * f64::from(SR)) as usize];
        let mut truth = Vec::new();
        for _ in 0..10 {
            let on = x.len() as f64 / f64::from(SR);
            x.extend(tone((burst * f64::from(SR)) as usize, 220.0, 0.5));
            truth.push((on, on + burst));
            x.extend(vec![0.0; (gap * f64::from(SR)) as usize]);
        }
        let clip = AudioClip::new(x, SR).unwrap();
        let env = rms_envelope(&clip, 0.025, 0.01).unwrap();
        let spans = suggest_spans(&env, -6.0, 0.1, 0.1);
        assert_eq!(spans.len(), 10);
        for (s, (on, off)) in spans.iter().zip(truth) {
            assert!((s.onset_s - on).abs() <= env.hop_s, "{} vs {on}", s.onset_s);
            assert!((s.offset_s - off).abs() <= env.hop_s, "{} vs {off}", s.offset_s);
        }
    }

    #[test]
    fn silence_gives_no_spans() {
        let clip = AudioClip::new(vec![0.0; 16000], SR).unwrap();
        let env = rms_envelope(&clip, 0.025, 0.01).unwrap();
        assert!(suggest_spans(&env, -20.0, 0.1, 0.1).is_empty());
    }

    #[test]
    fn continuous_tone_gives_one_span() {
        let mut x = vec![0.0; 3200];
        x.extend(tone(16000, 150.0, 0.3));
        x.extend(vec![0.0; 3200]);
        let clip = AudioClip::new(x, SR).unwrap();
        let env = rms_envelope(&clip, 0.025, 0.01).unwrap();
        let spans = suggest_spans(&env, -6.0, 0.1, 0.1);
        assert_eq!(spans.len(), 1);
        assert!((spans[0].onset_s - 0.2).abs() <= 0.01);
        assert!((spans[0].offset_s - 1.2).abs() <= 0.01);
    }

    fn with_interior_silence(silence_s: f64) -> AudioClip {
        let mut x = tone(4800, 180.0, 0.5);
        x.extend(vec![0.0; (silence_s * f64::from(SR)).round() as usize]);
        x.extend(tone(4800, 180.0, 0.5));
        AudioClip::new(x, SR).unwrap()
    }

    #[test]
    fn one_interior_pause() {
        let total = detect_pauses(&with_interior_silence(0.1), &PauseConfig::default()).unwrap();
        assert!((total - 0.1).abs() <= 0.01, "{total}");
    }

    #[test]
    fn no_pause_in_continuous_tone() {
        let clip = AudioClip::new(tone(9600, 180.0, 0.5), SR).unwrap();
        assert_eq!(detect_pauses(&clip, &PauseConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn short_pause_ignored() {
        let total = detect_pauses(&with_interior_silence(0.04), &PauseConfig::default()).unwrap();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn edge_silence_is_not_a_pause() {
        let mut x = vec![0.0; 3200];
        x.extend(tone(9600, 180.0, 0.5));
        x.extend(vec![0.0; 3200]);
        let clip = AudioClip::new(x, SR).unwrap();
        assert_eq!(detect_pauses(&clip, &PauseConfig::default()).unwrap(), 0.0);
    }
}
