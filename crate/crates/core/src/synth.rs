//! Synthetic cohort generator with known ground truth.
//!
//! Each subject gets three latent impairment levels in `[0, 1]` that drive
//! vocal jitter, vocal shimmer and reduced mouth opening. The clinical
//! target is linear in the three levels plus Gaussian noise, then split
//! into integer sub-scores for two raters.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    format_annotations, save_audio, save_landmarks, AudioClip, DatasetManifest, Group, LandmarkFrame, LandmarkTrack,
    Recording, RepetitionSpan, SubjectEntry, SubjectRecord, DEFAULT_REFERENCE, N_SUBSCORES,
};
use crate::error::{Error, Result};
use crate::eval::task_seed;
use crate::video::face::{articulate, neutral_face};

/// Width of the Gaussian glottal pulse, in samples.
const PULSE_SIGMA: f64 = 5.0;
/// Peak amplitude of an unperturbed pulse.
const PULSE_AMP: f64 = 0.5;
/// Perturbation draws are clipped to this many standard deviations.
const DRAW_CLIP: f64 = 3.0;
/// Mouth-opening cycles per repetition.
const SYLLABLES: f64 = 5.0;
/// Pixel scale of the reference face in the rendered video.
const FACE_SCALE: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub n_subjects: usize,
    pub reps_per_subject: usize,
    /// Fraction of subjects in the ALS group (the first ones by id).
    pub als_fraction: f64,
    pub sample_rate: u32,
    pub frame_rate: f64,
    /// Local jitter at impairment 0 and 1.
    pub jitter_range: (f64, f64),
    /// Local shimmer at impairment 0 and 1.
    pub shimmer_range: (f64, f64),
    pub f0_range: (f64, f64),
    pub hnr_db_range: (f64, f64),
    /// Peak mouth opening (reference-face pixels) at impairment 1 and 0.
    pub opening_range: (f64, f64),
    /// Landmark jitter (reference-face pixels).
    pub landmark_noise: f64,
    /// SD of the Gaussian noise added to the target, on the 5–25 scale.
    pub target_noise_sd: f64,
    /// Probability that a repetition's transcript contains an error.
    pub asr_error_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_subjects: 20,
            reps_per_subject: 10,
            als_fraction: 0.5,
            sample_rate: 16000,
            frame_rate: 30.0,
            jitter_range: (0.005, 0.03),
            shimmer_range: (0.02, 0.08),
            f0_range: (100.0, 220.0),
            hnr_db_range: (35.0, 45.0),
            opening_range: (4.0, 14.0),
            landmark_noise: 0.25,
            target_noise_sd: 0.3,
            asr_error_rate: 0.15,
            seed: 42,
        }
    }
}

fn ordered(name: &str, r: (f64, f64), lo: f64, hi: f64) -> Result<()> {
    if r.0.is_finite() && r.1.is_finite() && lo <= r.0 && r.0 <= r.1 && r.1 <= hi {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} {r:?} must be ordered within [{lo}, {hi}]")))
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.reps_per_subject == 0 {
            return Err(Error::Validation("need at least one subject and one repetition".into()));
        }
        if !(0.0..=1.0).contains(&self.als_fraction) {
            return Err(Error::Validation(format!("als_fraction {} outside [0, 1]", self.als_fraction)));
        }
        if !(8000..=96000).contains(&self.sample_rate) {
            return Err(Error::Validation(format!("sample_rate {} outside [8000, 96000]", self.sample_rate)));
        }
        if !(10.0..=240.0).contains(&self.frame_rate) {
            return Err(Error::Validation(format!("frame_rate {} outside [10, 240]", self.frame_rate)));
        }
        ordered("jitter_range", self.jitter_range, 0.0, 0.1)?;
        ordered("shimmer_range", self.shimmer_range, 0.0, 0.2)?;
        ordered("f0_range", self.f0_range, 60.0, 400.0)?;
        ordered("hnr_db_range", self.hnr_db_range, 0.0, 80.0)?;
        ordered("opening_range", self.opening_range, 0.0, 30.0)?;
        for (name, v, hi) in [
            ("landmark_noise", self.landmark_noise, 5.0),
            ("target_noise_sd", self.target_noise_sd, 5.0),
            ("asr_error_rate", self.asr_error_rate, 1.0),
        ] {
            if !(0.0..=hi).contains(&v) {
                return Err(Error::Validation(format!("{name} {v} outside [0, {hi}]")));
            }
        }
        Ok(())
    }

    fn n_als(&self) -> usize {
        (self.als_fraction * self.n_subjects as f64).round() as usize
    }

    fn subject_id(&self, k: usize) -> String {
        let width = self.n_subjects.to_string().len().max(2);
        format!("S{:0width$}", k + 1)
    }
}

/// Generation parameters and resulting target of one synthetic subject.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectTruth {
    pub subject_id: String,
    pub group: Group,
    pub jitter_level: f64,
    pub shimmer_level: f64,
    pub opening_level: f64,
    pub jitter: f64,
    pub shimmer: f64,
    pub opening_px: f64,
    pub f0: f64,
    pub hnr_db: f64,
    /// Noisy target before quantization into sub-scores.
    pub raw_target: f64,
    /// Target implied by the emitted sub-scores.
    pub target: f64,
}

/// Target rule: linear in the three impairment levels.
pub fn target_rule(jitter_level: f64, shimmer_level: f64, opening_level: f64) -> f64 {
    5.0 + 20.0 * (jitter_level + shimmer_level + opening_level) / 3.0
}

/// Splits a target into two raters' integer sub-scores whose mean sum is
/// the target rounded to the nearest half point (clamped to 5–25).
pub fn split_scores(target: f64) -> [[u8; N_SUBSCORES]; 2] {
    let total = (2.0 * target).round().clamp(10.0, 50.0) as usize;
    let extra = total - 2 * N_SUBSCORES;
    let mut slots = [1u8; 2 * N_SUBSCORES];
    for (k, s) in slots.iter_mut().enumerate() {
        *s += (extra / 10 + usize::from(k < extra % 10)) as u8;
    }
    let mut out = [[0u8; N_SUBSCORES]; 2];
    for (k, s) in slots.iter().enumerate() {
        out[k % 2][k / 2] = *s;
    }
    out
}

fn clipped_normal(rng: &mut impl Rng) -> f64 {
    let v: f64 = StandardNormal.sample(rng);
    v.clamp(-DRAW_CLIP, DRAW_CLIP)
}

/// Scale `c` such that `1 + c·e` has local relative perturbation `target`:
/// `c·mean|Δe| / (1 + c·mean(e)) = target`.
fn calibrate(e: &[f64], target: f64) -> f64 {
    if e.len() < 2 || target == 0.0 {
        return 0.0;
    }
    let m1 = e.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (e.len() - 1) as f64;
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    target / (m1 - target * mean)
}

/// Voice of one subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceSpec {
    pub f0: f64,
    pub jitter: f64,
    pub shimmer: f64,
}

/// Adds a train of Gaussian pulses to `x[start..end]`. Consecutive periods
/// and peak amplitudes are perturbed so that the local jitter and shimmer
/// of the train equal the requested values.
pub fn add_pulse_train(x: &mut [f64], sr: f64, start: usize, end: usize, voice: &VoiceSpec, rng: &mut impl Rng) {
    let t0 = sr / voice.f0;
    let n = ((end - start) as f64 / (t0 * (1.0 - DRAW_CLIP * 0.2))).ceil() as usize + 2;
    let e: Vec<f64> = (0..n).map(|_| clipped_normal(rng)).collect();
    let a: Vec<f64> = (0..n).map(|_| clipped_normal(rng)).collect();
    // Calibrate over the pulses that actually fit in the span.
    let fit = (((end - start) as f64 / t0).floor() as usize).clamp(2, n);
    let c = calibrate(&e[..fit - 1], voice.jitter);
    let d = calibrate(&a[..fit - 1], voice.shimmer);
    let reach = (5.0 * PULSE_SIGMA).ceil() as usize;
    let mut pos = start as f64 + reach as f64 + rng.random_range(0.0..1.0);
    for k in 0..n {
        if pos + reach as f64 >= end as f64 {
            break;
        }
        let amp = PULSE_AMP * (1.0 + d * a[k]);
        let centre = pos.round() as usize;
        for i in centre - reach..=centre + reach {
            let u = (i as f64 - pos) / PULSE_SIGMA;
            x[i] += amp * (-0.5 * u * u).exp();
        }
        pos += t0 * (1.0 + c * e[k]);
    }
}

/// RMS of an unperturbed pulse train at `f0`.
fn pulse_rms(f0: f64, sr: f64) -> f64 {
    PULSE_AMP * (PULSE_SIGMA * PI.sqrt() * f0 / sr).sqrt()
}

struct SubjectData {
    truth: SubjectTruth,
    record: SubjectRecord,
    audio: AudioClip,
    landmarks: LandmarkTrack,
    spans: Vec<RepetitionSpan>,
    transcripts: Vec<String>,
}

fn lerp(r: (f64, f64), u: f64) -> f64 {
    r.0 + (r.1 - r.0) * u
}

fn transcript(rng: &mut impl Rng, error_rate: f64) -> String {
    let mut words: Vec<&str> = DEFAULT_REFERENCE.split(' ').collect();
    if rng.random_bool(error_rate) {
        let k = rng.random_range(0..words.len());
        match rng.random_range(0..3) {
            0 => {
                words.remove(k);
            }
            1 => words[k] = ["by", "bob", "pub", "poppy"][rng.random_range(0..4)],
            _ => words.insert(k, "uh"),
        }
    }
    words.join(" ")
}

fn similarity(f: &LandmarkFrame, theta: f64, s: f64, tx: f64, ty: f64) -> LandmarkFrame {
    let (sin, cos) = theta.sin_cos();
    let mut out = *f;
    for (o, p) in out.iter_mut().zip(f) {
        *o = [s * (cos * p[0] - sin * p[1]) + tx, s * (sin * p[0] + cos * p[1]) + ty, s * p[2]];
    }
    out
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn generate_subject(p: &SynthParams, k: usize) -> Result<SubjectData> {
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(p.seed, k, 0, 0));
    let group = if k < p.n_als() { Group::Als } else { Group::Hc };
    let severity: f64 = match group {
        Group::Als => rng.random_range(0.3..1.0),
        Group::Hc => rng.random_range(0.0..0.4),
    };
    let spread = Normal::new(0.0, 0.15).expect("valid sd");
    let mut level = || (severity + spread.sample(&mut rng)).clamp(0.0, 1.0);
    let (jl, sl, ol) = (level(), level(), level());
    let voice = VoiceSpec {
        f0: rng.random_range(p.f0_range.0..=p.f0_range.1),
        jitter: lerp(p.jitter_range, jl),
        shimmer: lerp(p.shimmer_range, sl),
    };
    let hnr_db = rng.random_range(p.hnr_db_range.0..=p.hnr_db_range.1);
    let opening_px = lerp(p.opening_range, 1.0 - ol);
    let raw_target = target_rule(jl, sl, ol) + p.target_noise_sd * Distribution::<f64>::sample(&StandardNormal, &mut rng);
    let scores = split_scores(raw_target);
    let id = p.subject_id(k);
    let record = SubjectRecord::new(id.clone(), group, scores)?;

    // Repetition layout: voiced chunk, interior pause, voiced chunk.
    let mut spans = Vec::with_capacity(p.reps_per_subject);
    let mut chunks = Vec::new();
    let mut t = 0.4;
    for rep in 1..=p.reps_per_subject {
        let onset = round4(t);
        let d1 = rng.random_range(0.40..0.55);
        let pause = rng.random_range(0.10..0.20);
        let d2 = rng.random_range(0.40..0.55);
        let margin = 0.02;
        let offset = round4(onset + 2.0 * margin + d1 + pause + d2);
        chunks.push((onset + margin, onset + margin + d1));
        chunks.push((onset + margin + d1 + pause, offset - margin));
        spans.push(RepetitionSpan { index: rep as u32, onset_s: onset, offset_s: offset });
        t = offset + rng.random_range(0.35..0.6);
    }
    let duration = t + 0.4;

    let sr = f64::from(p.sample_rate);
    let mut x = vec![0.0; (duration * sr).ceil() as usize];
    for &(a, b) in &chunks {
        add_pulse_train(&mut x, sr, (a * sr) as usize, (b * sr) as usize, &voice, &mut rng);
    }
    let noise_sd = pulse_rms(voice.f0, sr) * 10f64.powf(-hnr_db / 20.0);
    for v in x.iter_mut() {
        *v += noise_sd * Distribution::<f64>::sample(&StandardNormal, &mut rng);
    }
    let audio = AudioClip::new(x, p.sample_rate)?;

    let transcripts = (0..p.reps_per_subject).map(|_| transcript(&mut rng, p.asr_error_rate)).collect();

    let base = neutral_face();
    let pose_phase: f64 = rng.random_range(0.0..2.0 * PI);
    let corner_gain: Vec<f64> = spans.iter().map(|_| rng.random_range(0.2..0.3)).collect();
    let n_frames = (duration * p.frame_rate).ceil() as usize;
    let frames = (0..n_frames)
        .map(|f| {
            let t = f as f64 / p.frame_rate;
            let (opening, gain) = spans
                .iter()
                .zip(&corner_gain)
                .find(|(s, _)| t >= s.onset_s && t <= s.offset_s)
                .map(|(s, &g)| {
                    let phase = PI * SYLLABLES * (t - s.onset_s) / s.duration_s();
                    (opening_px * phase.sin().powi(2), g)
                })
                .unwrap_or((0.0, 0.0));
            let mut noise = || p.landmark_noise * Distribution::<f64>::sample(&StandardNormal, &mut rng);
            let corners = (gain * opening + noise(), gain * opening + noise());
            let mut frame = articulate(&base, opening, corners);
            for pt in frame.iter_mut() {
                pt[0] += noise();
                pt[1] += noise();
            }
            let theta = 0.04 * (2.0 * PI * 0.1 * t + pose_phase).sin();
            let scale = FACE_SCALE * (1.0 + 0.02 * (2.0 * PI * 0.07 * t).sin());
            similarity(&frame, theta, scale, 320.0 + 5.0 * (0.3 * t).sin(), 240.0 + 3.0 * (0.2 * t).cos())
        })
        .collect();
    let landmarks = LandmarkTrack::new(frames, p.frame_rate)?;

    Ok(SubjectData {
        truth: SubjectTruth {
            subject_id: id,
            group,
            jitter_level: jl,
            shimmer_level: sl,
            opening_level: ol,
            jitter: voice.jitter,
            shimmer: voice.shimmer,
            opening_px,
            f0: voice.f0,
            hnr_db,
            raw_target,
            target: record.target(),
        },
        record,
        audio,
        landmarks,
        spans,
        transcripts,
    })
}

/// Result of [`synth_cohort`].
#[derive(Debug, Clone)]
pub struct SynthCohort {
    pub manifest: DatasetManifest,
    pub truth: Vec<SubjectTruth>,
}

pub const TRUTH_FILE: &str = "cohort_truth.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Generates a cohort and writes it under `out_dir`: one directory per
/// subject (audio.wav, landmarks.csv, annotations.csv, transcript.txt),
/// `manifest.json`, and the generation parameters in `cohort_truth.csv`.
/// Identical parameters produce byte-identical files.
pub fn synth_cohort(params: &SynthParams, out_dir: &Path) -> Result<SynthCohort> {
    params.validate()?;
    let subjects: Vec<SubjectData> = (0..params.n_subjects)
        .into_par_iter()
        .map(|k| generate_subject(params, k))
        .collect::<Result<_>>()?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::with_capacity(subjects.len());
    let mut truth_csv = csv::Writer::from_writer(Vec::new());
    for s in &subjects {
        let id = &s.record.subject_id;
        let dir = out_dir.join(id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        save_audio(&s.audio, &dir.join("audio.wav"))?;
        save_landmarks(&s.landmarks, &dir.join("landmarks.csv"))?;
        let ann = dir.join("annotations.csv");
        fs::write(&ann, format_annotations(&s.spans)).map_err(|e| Error::io(&ann, e))?;
        let tr = dir.join("transcript.txt");
        let mut text = s.transcripts.join("\n");
        text.push('\n');
        fs::write(&tr, text).map_err(|e| Error::io(&tr, e))?;
        entries.push(SubjectEntry {
            record: s.record.clone(),
            recordings: vec![Recording {
                audio_wav: Some(format!("{id}/audio.wav")),
                landmarks_csv: Some(format!("{id}/landmarks.csv")),
                annotations_csv: Some(format!("{id}/annotations.csv")),
                transcripts_txt: Some(format!("{id}/transcript.txt")),
                frame_rate: Some(params.frame_rate),
            }],
        });
        truth_csv.serialize(&s.truth).map_err(|e| Error::Validation(e.to_string()))?;
    }
    let truth_path = out_dir.join(TRUTH_FILE);
    let bytes = truth_csv.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    fs::write(&truth_path, bytes).map_err(|e| Error::io(&truth_path, e))?;
    let manifest = DatasetManifest::new(DEFAULT_REFERENCE, entries, out_dir)?;
    crate::dataset::save_manifest(&manifest, &out_dir.join(MANIFEST_FILE))?;
    Ok(SynthCohort { manifest, truth: subjects.into_iter().map(|s| s.truth).collect() })
}
