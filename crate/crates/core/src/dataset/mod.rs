//! Dataset manifest, file ingestion, repetition slicing and
//! cross-modality instance reconciliation.

pub mod annotations;
pub mod landmarks;
pub mod manifest;
pub mod reconcile;
pub mod slice;
pub mod types;
pub mod wav;

pub use annotations::{format_annotations, load_annotations, load_transcripts, read_annotations};
pub use landmarks::{load_landmarks, read_landmarks, save_landmarks, write_landmarks};
pub use manifest::{load_manifest, save_manifest, DatasetManifest, Recording, SubjectEntry, DEFAULT_REFERENCE};
pub use reconcile::{feature_names, reconcile_instances, Exclusion, Extracted, Instance, Reconciled, SubjectFeatures, TEMPLATE_REASON};
pub use slice::{slice_spans, span_range, Timeline};
pub use types::{
    validate_spans, AudioClip, Group, LandmarkFrame, LandmarkTrack, Modality, Point, RepetitionSpan, SubjectRecord,
    N_LANDMARKS, N_SUBSCORES,
};
pub use wav::{decode_wav, encode_wav, load_audio, save_audio};
