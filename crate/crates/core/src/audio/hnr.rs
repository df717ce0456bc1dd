use super::pitch::{centered, nccf, parabolic_peak, PitchTrack};
use crate::dataset::AudioClip;
use crate::error::{Error, Result};

const R_MIN: f64 = 1e-6;
const R_MAX: f64 = 1.0 - 1e-6;

/// Harmonics-to-noise ratio in dB for a normalized autocorrelation value.
pub fn frame_hnr_db(r: f64) -> f64 {
    let r = r.clamp(R_MIN, R_MAX);
    10.0 * (r / (1.0 - r)).log10()
}

/// Mean per-frame HNR over voiced frames, using the autocorrelation at
/// each frame's pitch lag.
pub fn hnr_mean(clip: &AudioClip, pitch: &PitchTrack) -> Result<f64> {
    let x = clip.samples();
    let sr = f64::from(clip.sample_rate());
    let mut sum = 0.0;
    let mut n = 0usize;
    for (k, f0) in pitch.f0.iter().enumerate() {
        let Some(f0) = f0 else { continue };
        let range = pitch.frame_range(k);
        if range.end > x.len() {
            continue;
        }
        let frame = centered(&x[range]);
        let lag = (sr / f0).round() as usize;
        if lag < 2 || lag + 1 >= frame.len() {
            continue;
        }
        let (_, r) = parabolic_peak(nccf(&frame, lag - 1), nccf(&frame, lag), nccf(&frame, lag + 1));
        sum += frame_hnr_db(r);
        n += 1;
    }
    if n == 0 {
        return Err(Error::MissingFeature("no voiced frames for HNR".into()));
    }
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::pitch::{estimate_pitch, PitchConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    #[test]
    fn formula_values() {
        assert!(frame_hnr_db(0.5).abs() < 1e-12);
        assert!((frame_hnr_db(0.99) - 10.0 * 99f64.log10()).abs() < 1e-12);
        assert!((frame_hnr_db(0.99) - 19.956).abs() < 1e-3);
        assert!((frame_hnr_db(1.0) - 60.0).abs() < 1e-3);
    }

    fn tone_plus_noise(noise_power_ratio: f64, seed: u64) -> AudioClip {
        let amp = 0.4;
        let signal_power = amp * amp / 2.0;
        let noise = Normal::new(0.0, (signal_power * noise_power_ratio).sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..16000)
            .map(|k| amp * (2.0 * PI * 180.0 * k as f64 / 16000.0).sin() + noise.sample(&mut rng))
            .map(|v: f64| v.clamp(-1.0, 1.0))
            .collect();
        AudioClip::new(x, 16000).unwrap()
    }

    #[test]
    fn clean_tone_high_hnr() {
        let clip = tone_plus_noise(0.0, 0);
        let pitch = estimate_pitch(&clip, &PitchConfig::default()).unwrap();
        assert!(hnr_mean(&clip, &pitch).unwrap() >= 20.0);
    }

    #[test]
    fn equal_power_noise_near_zero_db() {
        for seed in 0..3 {
            let clip = tone_plus_noise(1.0, seed);
            let pitch = estimate_pitch(&clip, &PitchConfig::default()).unwrap();
            let h = hnr_mean(&clip, &pitch).unwrap();
            assert!(h.abs() <= 2.0, "seed {seed}: {h}");
        }
    }

    #[test]
    fn unvoiced_is_missing() {
        let clip = AudioClip::new(vec![0.0; 8000], 16000).unwrap();
        let pitch = estimate_pitch(&clip, &PitchConfig::default()).unwrap();
        assert!(hnr_mean(&clip, &pitch).is_err());
    }
}
