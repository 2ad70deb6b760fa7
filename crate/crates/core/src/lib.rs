//! Toolkit for building literal/simile parallel corpora, generating similes
//! with a fine-tuned seq2seq backend or one of three baselines, and scoring
//! the results.
//!
//! The crate is organised around the pipeline stages:
//!
//! - [`simile`]: simile structure, trigger matching and the shared splitting operations.
//! - [`harvest`]: comment-dump ingestion, deduplication and corpus splits.
//! - [`knowledge`]: HasProperty lookups in both directions.
//! - [`lm`]: perplexity, top-k decoding and fine-tuning contracts with reference backends.
//! - [`corpus`]: simile → best literal transformation.
//! - [`generate`]: the four simile generators.
//! - [`eval`]: vehicle BLEU, embedding F1, novelty and human-score aggregation.
//! - [`story`]: replacing one literal sentence of a story with a simile.
//! - [`cli`]: command-line orchestration.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod generate;
pub mod harvest;
pub mod jsonl;
pub mod knowledge;
pub mod lm;
pub mod par;
pub mod remote;
pub mod simile;
pub mod story;
pub mod tagger;
pub mod text;

pub use simile::{LiteralSentence, SimileInstance, TriggerConfig};
pub use tagger::{LexiconTagger, PosTag, Tagger};
