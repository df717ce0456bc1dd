//! Acoustic analysis of segmented sentence repetitions.

pub mod dtw;
pub mod envelope;
pub mod features;
pub mod hnr;
pub mod mfcc;
pub mod perturbation;
pub mod pitch;
pub mod wer;

pub use dtw::dtw_distance;
pub use envelope::{detect_pauses, rms_envelope, suggest_spans, Envelope, EnvelopeFrame, PauseConfig};
pub use features::{audio_features, f0_stats, AudioConfig, AudioContext, AudioFeatures, F0Stats, AUDIO_FEATURE_NAMES};
pub use hnr::{frame_hnr_db, hnr_mean};
pub use mfcc::{mfcc, MfccConfig};
pub use perturbation::{extract_periods, jitter_metrics, shimmer_metrics, PeriodSequence, Perturbation};
pub use pitch::{estimate_pitch, PitchConfig, PitchTrack};
pub use wer::{edit_distance, normalize_words, word_error_rate};
