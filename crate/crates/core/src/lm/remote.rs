//! Wire protocol for out-of-process language-model backends.
//!
//! Requests are JSON objects tagged by `op`:
//!
//! ```json
//! {"op":"perplexity","text":"Love is rare."}
//! {"op":"generate","source":"Love is rare.","config":{"top_k":5,"temperature":0.7,"max_new_tokens":64,"seed":1},"model":"models/scope"}
//! {"op":"fine_tune","pairs":[...],"config":{"epochs":17,"batch_token_budget":1024,"seed":1},"output_dir":"models/scope"}
//! {"op":"correct","text":"... very relax."}
//! ```
//!
//! Responses are `{"perplexity":f}`, `{"text":s,"truncated":b}`,
//! `{"model_dir":s}` and `{"text":s}` respectively, or `{"error":msg}`.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Generation, GenerationConfig, Generator, LmError, Scorer, TrainConfig, Trainer};
use crate::corpus::ParallelPair;
use crate::remote::{JsonLineClient, RemoteError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum BackendRequest {
    Perplexity {
        text: String,
    },
    Generate {
        source: String,
        config: GenerationConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<String>,
    },
    FineTune {
        pairs: Vec<ParallelPair>,
        config: TrainConfig,
        output_dir: String,
    },
    Correct {
        text: String,
    },
}

#[derive(Debug, Deserialize)]
struct PerplexityResponse {
    perplexity: f64,
}

#[derive(Debug, Deserialize)]
struct FineTuneResponse {
    model_dir: String,
}

#[derive(Debug, Deserialize)]
pub(crate) struct TextResponse {
    pub text: String,
}

/// A running backend process. Cheap to clone; clones share the process.
#[derive(Debug, Clone)]
pub struct RemoteLm {
    client: Arc<JsonLineClient>,
    model: Option<String>,
}

impl RemoteLm {
    pub fn spawn(command: &str) -> Result<Self, RemoteError> {
        Ok(Self {
            client: Arc::new(JsonLineClient::spawn(command)?),
            model: None,
        })
    }

    /// Same process, generating from the model stored at `dir`.
    pub fn with_model(&self, dir: impl Into<String>) -> Self {
        Self {
            client: Arc::clone(&self.client),
            model: Some(dir.into()),
        }
    }

    pub(crate) fn call<T: serde::de::DeserializeOwned>(&self, req: &BackendRequest) -> Result<T, LmError> {
        Ok(self.client.call(req)?)
    }
}

impl Scorer for RemoteLm {
    fn perplexity(&self, text: &str) -> Result<f64, LmError> {
        let r: PerplexityResponse = self.call(&BackendRequest::Perplexity { text: text.into() })?;
        if !(r.perplexity.is_finite() && r.perplexity > 0.0) {
            return Err(RemoteError::Backend(format!("non-positive perplexity {}", r.perplexity)).into());
        }
        Ok(r.perplexity)
    }
}

impl Generator for RemoteLm {
    fn generate(&self, source: &str, cfg: &GenerationConfig) -> Result<Generation, LmError> {
        self.call(&BackendRequest::Generate {
            source: source.into(),
            config: cfg.clone(),
            model: self.model.clone(),
        })
    }
}

/// Fine-tunes through the backend, which writes the model to `output_dir`.
#[derive(Debug, Clone)]
pub struct RemoteTrainer {
    pub backend: RemoteLm,
    pub output_dir: PathBuf,
}

impl Trainer for RemoteTrainer {
    type Model = RemoteLm;

    fn fine_tune(&self, pairs: &[ParallelPair], cfg: &TrainConfig) -> Result<RemoteLm, LmError> {
        let r: FineTuneResponse = self.backend.call(&BackendRequest::FineTune {
            pairs: pairs.to_vec(),
            config: cfg.clone(),
            output_dir: self.output_dir.display().to_string(),
        })?;
        Ok(self.backend.with_model(r.model_dir))
    }
}
