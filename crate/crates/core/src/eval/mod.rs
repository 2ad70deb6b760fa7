//! Automatic metrics over generated vehicles and aggregation of human ratings.

mod bleu;
mod embedding;
mod human;
mod report;

use std::collections::HashSet;
use std::path::PathBuf;

use thiserror::Error;

pub use bleu::{vehicle_bleu, vehicle_bleu_with, Smoothing};
pub use embedding::{embedding_f1, CharNgramEmbedder, Embedder, OneHotEmbedder, TableEmbedder};
pub use human::{
    krippendorff_alpha, mean_scores, pairwise_compare, sheet_alpha, Criterion, Pairwise, ScoreRow, ScoreSheet,
};
pub use report::{evaluate_system, GoldItem, MetricReport, SystemInputs, SystemMetrics};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{candidates} candidates but {references} reference sets")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("no generated pairs to score")]
    EmptyGenerated,
    #[error("BLEU order must be 1 or greater, got {0}")]
    InvalidOrder(usize),
    #[error("items missing from one system: {}", .missing.join(", "))]
    MissingItem { missing: Vec<String> },
    #[error("no ratings for system {system:?} on criterion {criterion}")]
    NoRatings { system: String, criterion: Criterion },
    #[error("score sheet line {line}: {message}")]
    Sheet { line: usize, message: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn normalize_pair(property: &str, vehicle: &str) -> (String, String) {
    (property.trim().to_lowercase(), vehicle.trim().to_lowercase())
}

/// Fraction of generated (property, vehicle) pairs absent from the training pairs.
pub fn novelty<S: AsRef<str>>(generated: &[(S, S)], training: &[(S, S)]) -> Result<f64, EvalError> {
    if generated.is_empty() {
        return Err(EvalError::EmptyGenerated);
    }
    let seen: HashSet<(String, String)> = training
        .iter()
        .map(|(p, v)| normalize_pair(p.as_ref(), v.as_ref()))
        .collect();
    let novel = generated
        .iter()
        .filter(|(p, v)| !seen.contains(&normalize_pair(p.as_ref(), v.as_ref())))
        .count();
    Ok(novel as f64 / generated.len() as f64)
}
