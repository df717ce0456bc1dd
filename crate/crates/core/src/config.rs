//! Run configuration: one TOML file, every field optional.
//!
//! ```toml
//! manifest = "cohort/manifest.json"
//! out = "results"
//! seed = 7
//! modalities = ["audio", "multimodal"]
//! models = ["svr"]
//! clamp_predictions = false
//!
//! [grid]
//! preset = "smoke"
//! [grid.svr]
//! c = [1.0, 10.0]
//! epsilon = [0.1]
//! kernel = ["linear"]
//!
//! [audio.pitch]
//! f0_floor = 75.0
//!
//! [train.mlp]
//! epochs = 300
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::AudioConfig;
use crate::dataset::Modality;
use crate::error::{Error, Result};
use crate::regress::{GbtGrid, MlpGrid, ModelFamily, ModelSpec, SvrGrid, TrainOptions};

/// Range of the clinical target; used when clamping is enabled.
pub const TARGET_RANGE: (f64, f64) = (5.0, 25.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    #[default]
    Full,
    Smoke,
}

/// Which hyperparameter grid each family searches. An explicit family
/// grid replaces the preset for that family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub preset: GridPreset,
    pub svr: Option<SvrGrid>,
    pub mlp: Option<MlpGrid>,
    pub gbt: Option<GbtGrid>,
}

impl GridConfig {
    pub fn specs(&self, family: ModelFamily) -> Vec<ModelSpec> {
        let smoke = self.preset == GridPreset::Smoke;
        match family {
            ModelFamily::Svr => self
                .svr
                .clone()
                .unwrap_or_else(|| if smoke { SvrGrid::smoke() } else { SvrGrid::full() })
                .specs(),
            ModelFamily::Mlp => self
                .mlp
                .clone()
                .unwrap_or_else(|| if smoke { MlpGrid::smoke() } else { MlpGrid::full() })
                .specs(),
            ModelFamily::Gbt => self
                .gbt
                .clone()
                .unwrap_or_else(|| if smoke { GbtGrid::smoke() } else { GbtGrid::full() })
                .specs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
    /// TOML integers are signed, so seeds above `i64::MAX` are written as strings.
    #[serde(with = "seed_format")]
    pub seed: u64,
    pub modalities: Vec<Modality>,
    pub models: Vec<ModelFamily>,
    /// Clamp predictions to the 5–25 target range.
    pub clamp_predictions: bool,
    pub grid: GridConfig,
    pub audio: AudioConfig,
    pub train: TrainOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            out: PathBuf::from("out"),
            seed: 42,
            modalities: Modality::ALL.to_vec(),
            models: ModelFamily::ALL.to_vec(),
            clamp_predictions: false,
            grid: GridConfig::default(),
            audio: AudioConfig::default(),
            train: TrainOptions::default(),
        }
    }
}

mod seed_format {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    struct SeedVisitor;

    impl Visitor<'_> for SeedVisitor {
        type Value = u64;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an unsigned 64-bit integer")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
            u64::try_from(v).map_err(|_| E::custom(format!("seed {v} is negative")))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
            Ok(v)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
            v.trim().parse().map_err(|_| E::custom(format!("seed {v:?} is not an unsigned 64-bit integer")))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        d.deserialize_any(SeedVisitor)
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(what()))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, context: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn clamp(&self) -> Option<(f64, f64)> {
        self.clamp_predictions.then_some(TARGET_RANGE)
    }

    pub fn validate(&self) -> Result<()> {
        self.audio
            .pitch
            .validate()
            .map_err(|e| Error::Validation(format!("audio.pitch: {e}")))?;
        let p = &self.audio.pitch;
        check(p.hop_s > 0.0 && p.hop_s <= p.window_s, || {
            format!("audio.pitch.hop_s {} must be in (0, window_s]", p.hop_s)
        })?;
        check((0.0..1.0).contains(&p.voicing_threshold), || {
            format!("audio.pitch.voicing_threshold {} must be in [0, 1)", p.voicing_threshold)
        })?;
        let q = &self.audio.pause;
        check(q.rel_threshold_db < 0.0, || {
            format!("audio.pause.rel_threshold_db {} must be negative", q.rel_threshold_db)
        })?;
        check(q.min_pause_s >= 0.0, || format!("audio.pause.min_pause_s {} is negative", q.min_pause_s))?;
        check(q.window_s > 0.0 && q.hop_s > 0.0 && q.hop_s <= q.window_s, || {
            format!("audio.pause window {} / hop {} invalid", q.window_s, q.hop_s)
        })?;
        let m = &self.audio.mfcc;
        check(m.window_s > 0.0 && m.hop_s > 0.0 && m.hop_s <= m.window_s, || {
            format!("audio.mfcc window {} / hop {} invalid", m.window_s, m.hop_s)
        })?;
        check(m.n_coeffs >= 1 && m.n_coeffs <= m.n_mels, || {
            format!("audio.mfcc.n_coeffs {} must be in [1, n_mels = {}]", m.n_coeffs, m.n_mels)
        })?;
        let s = &self.train.svr;
        check(s.tolerance > 0.0 && s.max_iter_factor >= 1, || format!("train.svr {s:?} invalid"))?;
        let n = &self.train.mlp;
        check(
            n.epochs >= 1
                && n.batch_size >= 1
                && (0.0..1.0).contains(&n.beta1)
                && (0.0..1.0).contains(&n.beta2)
                && n.epsilon > 0.0,
            || format!("train.mlp {n:?} invalid"),
        )?;
        check(!self.modalities.is_empty(), || "modalities must not be empty".into())?;
        check(!self.models.is_empty(), || "models must not be empty".into())?;
        for family in ModelFamily::ALL {
            let specs = self.grid.specs(family);
            check(!specs.is_empty(), || format!("grid.{family} is empty"))?;
            for spec in &specs {
                spec.validate().map_err(|e| Error::Validation(format!("grid.{family}: {e}")))?;
            }
        }
        Ok(())
    }
}
