//! Conditional template n-gram seq2seq model.
//!
//! Each training pair is aligned on its longest common token prefix. The
//! shared part is learned as a copy operation; the rewritten part of the
//! target (the "tail", e.g. `like a unicorn .`) is learned by two trigram
//! models: one conditioned on the rewritten source words (the property) and
//! one unconditional. At inference the model copies the source up to the
//! words it has learned to rewrite and then samples the tail.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::decode::{NextTokenModel, END_TOKEN};
use super::{LmError, TrainConfig, Trainer};
use crate::corpus::ParallelPair;
use crate::text;

const TAIL_START: &str = "<t>";
const SEP: char = '\u{1f}';

/// Interpolation weight of the conditional tail model when its context is known.
const COND_WEIGHT: f64 = 0.99;

type Counts = BTreeMap<String, u32>;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Ngrams {
    tri: BTreeMap<String, Counts>,
    bi: BTreeMap<String, Counts>,
    uni: Counts,
}

impl Ngrams {
    fn observe(&mut self, h2: &str, h1: &str, w: &str) {
        bump(self.tri.entry(format!("{h2}{SEP}{h1}")).or_default(), w);
        bump(self.bi.entry(h1.to_string()).or_default(), w);
        bump(&mut self.uni, w);
    }

    /// Interpolated distribution, sparse. The unigram level is only used when
    /// the trigram context is unseen.
    fn distribution(&self, h2: &str, h1: &str) -> BTreeMap<String, f64> {
        let tri = self.tri.get(&format!("{h2}{SEP}{h1}"));
        let bi = self.bi.get(h1);
        let weights: [(Option<&Counts>, f64); 3] = match (tri, bi) {
            (Some(t), b) => [(Some(t), 0.85), (b, 0.15), (None, 0.0)],
            (None, Some(b)) => [(None, 0.0), (Some(b), 0.9), (Some(&self.uni), 0.1)],
            (None, None) => [(None, 0.0), (None, 0.0), (Some(&self.uni), 1.0)],
        };
        let mut out = BTreeMap::new();
        for (counts, w) in weights {
            if let Some(c) = counts {
                add_normalized(&mut out, c, w);
            }
        }
        out
    }
}

fn bump(c: &mut Counts, w: &str) {
    *c.entry(w.to_string()).or_default() += 1;
}

fn add_normalized(out: &mut BTreeMap<String, f64>, counts: &Counts, weight: f64) {
    let total: u32 = counts.values().sum();
    if total == 0 || weight == 0.0 {
        return;
    }
    for (w, c) in counts {
        *out.entry(w.clone()).or_default() += weight * f64::from(*c) / f64::from(total);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateModel {
    /// Tail trigram models keyed by the rewritten source words.
    conditional: BTreeMap<String, Ngrams>,
    tail: Ngrams,
    /// Histogram of how many source content words the targets rewrote.
    rewrite_lengths: BTreeMap<usize, u32>,
    max_key_len: usize,
    config: TrainConfig,
    pairs: usize,
}

/// How a source is split into the copied part and the rewritten key.
struct Plan {
    copy: Vec<String>,
    key: Option<String>,
}

fn content_key<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !text::is_punct(t))
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl TemplateModel {
    pub fn train_config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn training_pairs(&self) -> usize {
        self.pairs
    }

    fn default_rewrite_len(&self) -> usize {
        self.rewrite_lengths
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map_or(1, |(len, _)| *len)
    }

    fn plan(&self, source: &[String]) -> Plan {
        let content: Vec<usize> = source
            .iter()
            .enumerate()
            .filter(|(_, t)| !text::is_punct(t))
            .map(|(i, _)| i)
            .collect();
        let longest = self.max_key_len.min(content.len());
        let known = (1..=longest).rev().find_map(|len| {
            let from = content[content.len() - len];
            let key = content_key(&source[from..]);
            self.conditional.contains_key(&key).then_some((len, key))
        });
        let (len, key) = match known {
            Some((len, key)) => (len, Some(key)),
            None => (self.default_rewrite_len().min(content.len()), None),
        };
        let cut = if len == 0 {
            // nothing rewritten: copy through the last content word
            content.last().map_or(0, |&i| i + 1)
        } else {
            content[content.len() - len]
        };
        Plan {
            copy: source[..cut].to_vec(),
            key,
        }
    }
}

impl NextTokenModel for TemplateModel {
    fn next_token_scores(&self, source: &[String], decoded: &[String]) -> Vec<(String, f64)> {
        let plan = self.plan(source);
        let shared = decoded
            .iter()
            .zip(&plan.copy)
            .take_while(|(a, b)| a == b)
            .count();
        if shared == decoded.len() && shared < plan.copy.len() {
            return vec![(plan.copy[shared].clone(), 0.0)];
        }
        let tail = &decoded[shared..];
        let h1 = tail.last().map_or(TAIL_START, String::as_str);
        let h2 = if tail.len() >= 2 {
            tail[tail.len() - 2].as_str()
        } else {
            TAIL_START
        };
        let mut dist = self.tail.distribution(h2, h1);
        let cond = plan
            .key
            .as_ref()
            .and_then(|k| self.conditional.get(k))
            .filter(|c| c.tri.contains_key(&format!("{h2}{SEP}{h1}")));
        if let Some(c) = cond {
            for p in dist.values_mut() {
                *p *= 1.0 - COND_WEIGHT;
            }
            for (w, p) in c.distribution(h2, h1) {
                *dist.entry(w).or_default() += COND_WEIGHT * p;
            }
        }
        dist.into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(w, p)| (w, p.ln()))
            .collect()
    }
}

/// Count-based trainer for [`TemplateModel`]. Deterministic: the result does
/// not depend on pair order or on the seed, which is recorded for the manifest.
#[derive(Debug, Clone, Default)]
pub struct TemplateTrainer;

impl TemplateTrainer {
    pub fn train(&self, pairs: &[(String, String)], cfg: &TrainConfig) -> Result<TemplateModel, LmError> {
        if pairs.is_empty() {
            return Err(LmError::EmptyTrainingSet);
        }
        cfg.validate()?;
        let mut model = TemplateModel {
            conditional: BTreeMap::new(),
            tail: Ngrams::default(),
            rewrite_lengths: BTreeMap::new(),
            max_key_len: 0,
            config: cfg.clone(),
            pairs: pairs.len(),
        };
        for (source, target) in pairs {
            let src = text::words(source);
            let tgt = text::words(target);
            let shared = src.iter().zip(&tgt).take_while(|(a, b)| a == b).count();
            let key = content_key(&src[shared..]);
            let key_len = if key.is_empty() { 0 } else { key.split(' ').count() };
            *model.rewrite_lengths.entry(key_len).or_default() += 1;
            model.max_key_len = model.max_key_len.max(key_len);

            let mut h2 = TAIL_START.to_string();
            let mut h1 = TAIL_START.to_string();
            let cond = model.conditional.entry(key).or_default();
            for w in tgt[shared..].iter().map(String::as_str).chain([END_TOKEN]) {
                cond.observe(&h2, &h1, w);
                model.tail.observe(&h2, &h1, w);
                h2 = std::mem::replace(&mut h1, w.to_string());
            }
        }
        // An empty key conditions on nothing; keep it out of the lookup.
        model.conditional.remove("");
        Ok(model)
    }
}

impl Trainer for TemplateTrainer {
    type Model = TemplateModel;

    fn fine_tune(&self, pairs: &[ParallelPair], cfg: &TrainConfig) -> Result<TemplateModel, LmError> {
        let pairs: Vec<(String, String)> = pairs
            .iter()
            .map(|p| (p.source.clone(), p.target.clone()))
            .collect();
        self.train(&pairs, cfg)
    }
}
