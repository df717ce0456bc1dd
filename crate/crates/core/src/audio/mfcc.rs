//! Mel-frequency cepstral coefficients: Hann window, magnitude spectrum,
//! triangular mel filterbank (HTK mel scale, 0 Hz to Nyquist), natural
//! log, orthonormal DCT-II.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::envelope::frame_geometry;
use crate::dataset::AudioClip;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccConfig {
    pub window_s: f64,
    pub hop_s: f64,
    pub n_mels: usize,
    pub n_coeffs: usize,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            window_s: 0.025,
            hop_s: 0.010,
            n_mels: 26,
            n_coeffs: 13,
        }
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// `n_mels × (n_fft / 2 + 1)` triangular weights.
fn mel_filterbank(n_mels: usize, n_fft: usize, sample_rate: f64) -> Vec<Vec<f64>> {
    let n_bins = n_fft / 2 + 1;
    let top = hz_to_mel(sample_rate / 2.0);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    (0..n_mels)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..n_bins)
                .map(|b| {
                    let f = b as f64 * sample_rate / n_fft as f64;
                    if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Frames × `n_coeffs` matrix; frame count is `floor((N - W) / H) + 1`.
pub fn mfcc(clip: &AudioClip, cfg: &MfccConfig) -> Result<Matrix> {
    let (window, hop) = frame_geometry(clip.sample_rate(), cfg.window_s, cfg.hop_s)?;
    if cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_mels {
        return Err(Error::InvalidArgument(format!(
            "n_coeffs {} must be in 1..={}",
            cfg.n_coeffs, cfg.n_mels
        )));
    }
    let x = clip.samples();
    if x.len() < window {
        return Err(Error::TooShort(format!(
            "{} samples, one MFCC window needs {window}",
            x.len()
        )));
    }
    let n_frames = (x.len() - window) / hop + 1;
    let n_fft = window.next_power_of_two();
    let sr = f64::from(clip.sample_rate());
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let hann: Vec<f64> = (0..window)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (window - 1).max(1) as f64).cos())
        .collect();
    let bank = mel_filterbank(cfg.n_mels, n_fft, sr);
    let dct: Vec<Vec<f64>> = (0..cfg.n_coeffs)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / cfg.n_mels as f64).sqrt()
            } else {
                (2.0 / cfg.n_mels as f64).sqrt()
            };
            (0..cfg.n_mels)
                .map(|n| scale * (PI * k as f64 * (n as f64 + 0.5) / cfg.n_mels as f64).cos())
                .collect()
        })
        .collect();

    let mut out = Matrix::zeros(n_frames, cfg.n_coeffs);
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];
    let mut log_mel = vec![0.0; cfg.n_mels];
    for f in 0..n_frames {
        let start = f * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = if i < window {
                Complex::new(x[start + i] * hann[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (m, weights) in bank.iter().enumerate() {
            let e: f64 = weights.iter().zip(&buf).map(|(w, c)| w * c.norm()).sum();
            log_mel[m] = e.max(LOG_FLOOR).ln();
        }
        for (k, basis) in dct.iter().enumerate() {
            out.set(f, k, basis.iter().zip(&log_mel).map(|(b, l)| b * l).sum());
        }
    }
    Ok(out)
}
