//! Glottal cycle marking and cycle-to-cycle perturbation (jitter, shimmer).

use super::pitch::{parabolic_peak, PitchTrack};
use crate::dataset::AudioClip;
use crate::error::{Error, Result};

/// Marks below this fraction of the voiced region's peak are treated as
/// silence and break the cycle chain.
const MIN_MARK_RATIO: f64 = 0.25;
/// Search window around the expected next mark, as a fraction of the period.
const SEARCH_LO: f64 = 0.8;
const SEARCH_HI: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeriodSequence {
    /// Seconds per cycle.
    pub periods: Vec<f64>,
    /// Peak amplitude at the mark that opens each cycle.
    pub peak_amplitudes: Vec<f64>,
}

fn voiced_regions(pitch: &PitchTrack) -> Vec<(usize, usize)> {
    let mut regions = Vec::new();
    let mut start = None;
    for (k, f) in pitch.f0.iter().enumerate() {
        match (f.is_some(), start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                regions.push((s, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        regions.push((s, pitch.f0.len() - 1));
    }
    regions
}

/// Largest sample in `range`, moved uphill to the local maximum when it
/// sits on the flank of a peak cut by the window edge.
fn argmax(x: &[f64], range: std::ops::Range<usize>) -> usize {
    let mut best = range.start;
    for i in range {
        if x[i] > x[best] {
            best = i;
        }
    }
    while best + 1 < x.len() && x[best + 1] > x[best] {
        best += 1;
    }
    while best > 0 && x[best - 1] > x[best] {
        best -= 1;
    }
    best
}

/// Places one mark per cycle on the waveform maximum near each expected
/// cycle start, refined to sub-sample precision.
pub fn extract_periods(clip: &AudioClip, pitch: &PitchTrack) -> Result<PeriodSequence> {
    let x = clip.samples();
    let sr = f64::from(clip.sample_rate());
    let regions = voiced_regions(pitch);
    if regions.is_empty() {
        return Err(Error::MissingFeature("no voiced frames to mark".into()));
    }
    let mut out = PeriodSequence::default();
    for (first, last) in regions {
        let start = pitch.frame_range(first).start;
        let end = pitch.frame_range(last).end.min(x.len());
        let f0_at = |sample: f64| -> f64 {
            let k = ((sample - pitch.window as f64 / 2.0) / pitch.hop as f64)
                .round()
                .clamp(first as f64, last as f64) as usize;
            pitch.f0[k].expect("frame inside a voiced region")
        };
        let region_peak = x[start..end].iter().copied().fold(0.0, f64::max);
        if region_peak <= 0.0 {
            continue;
        }

        let refine = |i: usize| -> (f64, f64) {
            if i == 0 || i + 1 >= x.len() {
                return (i as f64, x[i]);
            }
            let (d, v) = parabolic_peak(x[i - 1], x[i], x[i + 1]);
            (i as f64 + d, v)
        };

        let t0 = sr / f0_at(start as f64);
        let first_end = (start + t0.ceil() as usize).min(end);
        let mut mark = argmax(x, start..first_end);
        let (mut pos, mut amp) = refine(mark);
        let mut prev: Option<(f64, f64)> = (amp >= MIN_MARK_RATIO * region_peak).then_some((pos, amp));
        loop {
            let period = sr / f0_at(pos);
            let lo = (pos + SEARCH_LO * period).ceil() as usize;
            let hi = ((pos + SEARCH_HI * period).floor() as usize + 1).min(end);
            if lo >= hi {
                break;
            }
            mark = argmax(x, lo..hi);
            (pos, amp) = refine(mark);
            if amp >= MIN_MARK_RATIO * region_peak {
                if let Some((p_pos, p_amp)) = prev {
                    out.periods.push((pos - p_pos) / sr);
                    out.peak_amplitudes.push(p_amp.abs());
                }
                prev = Some((pos, amp));
            } else {
                prev = None;
            }
        }
    }
    if out.periods.is_empty() {
        return Err(Error::MissingFeature("no complete glottal cycles found".into()));
    }
    Ok(out)
}

/// Local, three-point and five-point relative perturbation of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub local: f64,
    pub three_point: Option<f64>,
    pub five_point: Option<f64>,
}

/// Mean absolute deviation of each interior value from the mean of the
/// `2 * half + 1` values centred on it.
fn smoothed_deviation(v: &[f64], half: usize) -> Option<f64> {
    let w = 2 * half + 1;
    if v.len() < w {
        return None;
    }
    let sum: f64 = v
        .windows(w)
        .map(|win| (win[half] - win.iter().sum::<f64>() / w as f64).abs())
        .sum();
    Some(sum / (v.len() - 2 * half) as f64)
}

pub fn perturbation(values: &[f64]) -> Result<Perturbation> {
    if values.len() < 2 {
        return Err(Error::MissingFeature(format!(
            "{} cycle(s), perturbation needs at least 2",
            values.len()
        )));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean <= 0.0 {
        return Err(Error::MissingFeature("non-positive mean".into()));
    }
    let local = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
        / (values.len() - 1) as f64;
    Ok(Perturbation {
        local: local / mean,
        three_point: smoothed_deviation(values, 1).map(|d| d / mean),
        five_point: smoothed_deviation(values, 2).map(|d| d / mean),
    })
}

/// Jitter local / RAP / PPQ5 on cycle periods.
pub fn jitter_metrics(ps: &PeriodSequence) -> Result<Perturbation> {
    perturbation(&ps.periods)
}

/// Shimmer local / APQ3 / APQ5 on cycle peak amplitudes.
pub fn shimmer_metrics(ps: &PeriodSequence) -> Result<Perturbation> {
    perturbation(&ps.peak_amplitudes)
}
