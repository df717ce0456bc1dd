//! Speech impairment scoring from acoustic and facial-kinematic features
//! of repeated sentences.

pub mod audio;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod matrix;
pub mod pipeline;
pub mod regress;
pub mod report;
pub mod synth;
pub mod video;

pub use error::{Error, Result};
pub use matrix::Matrix;
