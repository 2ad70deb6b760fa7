//! Language-model contracts: perplexity scoring, conditional generation and
//! seq2seq fine-tuning.
//!
//! Neural backends live out of process and are reached through [`remote`].
//! The reference backends here are small count-based models that honour the
//! same contracts at desk scale:
//!
//! - [`BigramScorer`]: interpolated add-α word bigram model. It scores
//!   perplexity and doubles as the "pretrained" decoder for the
//!   prefix-forced baseline.
//! - [`TemplateModel`]: conditional template n-gram seq2seq model. It copies
//!   the shared source prefix and samples the rewritten tail.

mod decode;
pub mod remote;
mod scorer;
mod template;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ParallelPair;
use crate::remote::RemoteError;

pub use decode::{call_rng, decode, NextTokenModel, END_TOKEN};
pub use scorer::{BigramScorer, UniformScorer};
pub use template::{TemplateModel, TemplateTrainer};

#[derive(Debug, Error)]
pub enum LmError {
    #[error("cannot score empty text")]
    EmptyText,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("model directory {path}: {message}")]
    ModelDir { path: String, message: String },
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn default_top_k() -> usize {
    5
}
fn default_temperature() -> f64 {
    0.7
}
fn default_max_new_tokens() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_new_tokens")]
    pub max_new_tokens: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_prefix: Option<String>,
}

impl Default for GenerationConfig {
    /// Top-5 sampling at temperature 0.7.
    fn default() -> Self {
        Self {
            top_k: default_top_k(),
            temperature: default_temperature(),
            max_new_tokens: default_max_new_tokens(),
            seed: 0,
            forced_prefix: None,
        }
    }
}

impl GenerationConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_forced_prefix(mut self, prefix: impl Into<String>) -> Self {
        self.forced_prefix = Some(prefix.into());
        self
    }

    pub fn validate(&self) -> Result<(), LmError> {
        if self.top_k == 0 {
            return Err(LmError::InvalidConfig("top_k must be at least 1".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(LmError::InvalidConfig(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.max_new_tokens == 0 {
            return Err(LmError::InvalidConfig("max_new_tokens must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_token_budget: u32,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// 17 epochs with a 1024-token batch budget.
    fn default() -> Self {
        Self {
            epochs: 17,
            batch_token_budget: 1024,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LmError> {
        if self.epochs == 0 || self.batch_token_budget == 0 {
            return Err(LmError::InvalidConfig(
                "epochs and batch_token_budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Decoder output. `truncated` is set when `max_new_tokens` ran out before
/// the model emitted its end token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generation {
    pub text: String,
    pub truncated: bool,
}

pub trait Scorer: Send + Sync {
    /// exp of the mean per-token negative log-likelihood of `text`.
    fn perplexity(&self, text: &str) -> Result<f64, LmError>;
}

pub trait Generator: Send + Sync {
    fn generate(&self, source: &str, cfg: &GenerationConfig) -> Result<Generation, LmError>;
}

pub trait Trainer {
    type Model;
    fn fine_tune(&self, pairs: &[ParallelPair], cfg: &TrainConfig) -> Result<Self::Model, LmError>;
}

/// Perplexity of `text` under `scorer`; lower is more fluent.
pub fn perplexity(text: &str, scorer: &dyn Scorer) -> Result<f64, LmError> {
    if text.trim().is_empty() {
        return Err(LmError::EmptyText);
    }
    scorer.perplexity(text)
}

pub fn generate(source: &str, cfg: &GenerationConfig, model: &dyn Generator) -> Result<Generation, LmError> {
    cfg.validate()?;
    model.generate(source, cfg)
}

/// Trains on literal → simile pairs; the literal is the encoder source and the
/// simile the decoder target, both taken verbatim.
pub fn fine_tune<T: Trainer>(pairs: &[ParallelPair], cfg: &TrainConfig, backend: &T) -> Result<T::Model, LmError> {
    if pairs.is_empty() {
        return Err(LmError::EmptyTrainingSet);
    }
    cfg.validate()?;
    backend.fine_tune(pairs, cfg)
}

/// Manifest written next to every saved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub kind: String,
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_config: Option<TrainConfig>,
    pub training_examples: usize,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const WEIGHTS_FILE: &str = "model.json";

/// Reference model loaded from a model directory.
#[derive(Debug, Clone)]
pub enum ReferenceModel {
    Template(TemplateModel),
    Bigram(BigramScorer),
}

impl ReferenceModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ReferenceModel::Template(_) => "template",
            ReferenceModel::Bigram(_) => "bigram",
        }
    }

    pub fn manifest(&self) -> ModelManifest {
        let (train_config, training_examples) = match self {
            ReferenceModel::Template(m) => (Some(m.train_config().clone()), m.training_pairs()),
            ReferenceModel::Bigram(m) => (None, m.training_sentences()),
        };
        ModelManifest {
            kind: self.kind().into(),
            format_version: 1,
            train_config,
            training_examples,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>, LmError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| LmError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let weights = match self {
            ReferenceModel::Template(m) => serde_json::to_string(m),
            ReferenceModel::Bigram(m) => serde_json::to_string(m),
        }
        .expect("model serializes");
        let manifest = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        let mpath = dir.join(MANIFEST_FILE);
        let wpath = dir.join(WEIGHTS_FILE);
        std::fs::write(&mpath, manifest + "\n").map_err(io(&mpath))?;
        std::fs::write(&wpath, weights).map_err(io(&wpath))?;
        Ok(vec![mpath, wpath])
    }

    pub fn load(dir: &Path) -> Result<Self, LmError> {
        let bad = |message: String| LmError::ModelDir {
            path: dir.display().to_string(),
            message,
        };
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| bad(format!("{name}: {e}")))
        };
        let manifest: ModelManifest =
            serde_json::from_str(&read(MANIFEST_FILE)?).map_err(|e| bad(e.to_string()))?;
        let weights = read(WEIGHTS_FILE)?;
        match manifest.kind.as_str() {
            "template" => serde_json::from_str(&weights)
                .map(ReferenceModel::Template)
                .map_err(|e| bad(e.to_string())),
            "bigram" => serde_json::from_str(&weights)
                .map(ReferenceModel::Bigram)
                .map_err(|e| bad(e.to_string())),
            other => Err(bad(format!("unknown model kind {other:?}"))),
        }
    }
}

impl Generator for ReferenceModel {
    fn generate(&self, source: &str, cfg: &GenerationConfig) -> Result<Generation, LmError> {
        match self {
            ReferenceModel::Template(m) => m.generate(source, cfg),
            ReferenceModel::Bigram(m) => m.generate(source, cfg),
        }
    }
}
