//! Landmark normalization and facial-kinematic features of sentence
//! repetitions.

pub mod face;
pub mod features;
pub mod geometry;
pub mod kinematics;
pub mod normalize;

pub use features::{rest_reference, segment_track, video_features, RestReference, VideoFeatures, VIDEO_FEATURE_NAMES};
pub use geometry::{eccentricity, mouth_geometry, shoelace, MouthGeometry};
pub use kinematics::{corner_correlation, cumulative_path, derivative, jerk_rms, velocity_extrema};
pub use normalize::{idx, normalize_frame, normalize_track, NormalizedTrack};
