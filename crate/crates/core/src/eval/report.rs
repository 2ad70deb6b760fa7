use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{embedding_f1, novelty, vehicle_bleu_with, Embedder, EvalError, Smoothing};
use crate::generate::{GenerationRecord, SystemKind};
use crate::par;
use crate::simile::{extract_generated_vehicle, parse_simile, strip_terminal_modifier, TriggerConfig};
use crate::tagger::Tagger;
use crate::text;

/// Expert-written reference similes for one test literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldItem {
    pub literal: String,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub system: SystemKind,
    pub bleu1: f64,
    pub bleu2: f64,
    pub embedding_f1: f64,
    /// Absent when the system produced no scorable vehicle.
    pub novelty: Option<f64>,
    pub scored: usize,
    pub blank: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub systems: Vec<SystemMetrics>,
}

impl MetricReport {
    /// Fixed-width table: BLEU and novelty as percentages, embedding F1 as a fraction.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8} {:>6} {:>6} {:>7} {:>8}", "Model", "B-1", "B-2", "BERT-S", "Novelty");
        for m in &self.systems {
            let novelty = m.novelty.map_or_else(|| "-".to_string(), |n| format!("{:.1}", 100.0 * n));
            let _ = writeln!(
                out,
                "{:<8} {:>6.2} {:>6.2} {:>7.2} {:>8}",
                m.system.as_str().to_uppercase(),
                100.0 * m.bleu1,
                100.0 * m.bleu2,
                m.embedding_f1,
                novelty
            );
        }
        out
    }
}

pub struct SystemInputs<'a> {
    pub records: &'a [GenerationRecord],
    /// Reference similes keyed by literal.
    pub gold: &'a BTreeMap<String, Vec<String>>,
    /// (property, vehicle) pairs seen in training.
    pub training: &'a [(String, String)],
    pub embedder: &'a dyn Embedder,
    pub tagger: &'a dyn Tagger,
    pub triggers: &'a TriggerConfig,
    pub smoothing: Smoothing,
}

fn content(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !text::is_punct(t))
        .map(|t| t.to_lowercase())
        .collect()
}

fn reference_vehicle(reference: &str, literal: &str, triggers: &TriggerConfig) -> Vec<String> {
    match parse_simile(reference, triggers) {
        Some(s) => content(text::words(s.vehicle_phrase())),
        None => content(extract_generated_vehicle(reference, literal, triggers)),
    }
}

struct Scored {
    candidate: Vec<String>,
    references: Vec<Vec<String>>,
    blank: bool,
    property: Option<String>,
}

/// Scores one system's outputs. Blank retrieval outputs count as empty candidates.
pub fn evaluate_system(inputs: &SystemInputs<'_>) -> Result<SystemMetrics, EvalError> {
    let Some(first) = inputs.records.first() else {
        return Err(EvalError::EmptyGenerated);
    };
    let missing: Vec<String> = inputs
        .records
        .iter()
        .filter(|r| !inputs.gold.contains_key(&r.literal))
        .map(|r| r.literal.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingItem { missing });
    }
    let triggers = inputs.triggers;
    let scored: Vec<Scored> = par::map(inputs.records, |r| {
        let candidate = if r.blank {
            Vec::new()
        } else {
            content(extract_generated_vehicle(&r.output, &r.literal, triggers))
        };
        Scored {
            references: inputs.gold[&r.literal]
                .iter()
                .map(|g| reference_vehicle(g, &r.literal, triggers))
                .collect(),
            candidate,
            blank: r.blank,
            property: strip_terminal_modifier(&r.literal, inputs.tagger)
                .ok()
                .map(|s| s.property),
        }
    });
    let cands: Vec<Vec<String>> = scored.iter().map(|s| s.candidate.clone()).collect();
    let refs: Vec<Vec<Vec<String>>> = scored.iter().map(|s| s.references.clone()).collect();
    let f1s = par::map(&scored, |s| {
        let refs: Vec<String> = s.references.iter().map(|r| r.join(" ")).collect();
        embedding_f1(&s.candidate.join(" "), &refs, inputs.embedder)
    });
    let generated: Vec<(String, String)> = scored
        .iter()
        .filter(|s| !s.candidate.is_empty())
        .filter_map(|s| s.property.clone().map(|p| (p, s.candidate.join(" "))))
        .collect();
    let novelty = match novelty(&generated, inputs.training) {
        Ok(n) => Some(n),
        Err(EvalError::EmptyGenerated) => None,
        Err(e) => return Err(e),
    };
    Ok(SystemMetrics {
        system: first.system,
        bleu1: vehicle_bleu_with(&cands, &refs, 1, inputs.smoothing)?,
        bleu2: vehicle_bleu_with(&cands, &refs, 2, inputs.smoothing)?,
        embedding_f1: f1s.iter().sum::<f64>() / f1s.len() as f64,
        novelty,
        scored: scored.len(),
        blank: scored.iter().filter(|s| s.blank).count(),
    })
}
