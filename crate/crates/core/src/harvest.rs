//! Ingestion of comment dumps and literal-sentence sources.

use std::collections::HashSet;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::simile::{parse_simile, LiteralSentence, SimileError, SimileInstance, TriggerConfig};
use crate::tagger::Tagger;
use crate::text;

#[derive(Debug, Error, PartialEq)]
pub enum HarvestError {
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),
}

/// One record of a pushshift-style comment dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawComment {
    pub id: String,
    pub body: String,
    #[serde(default)]
    pub subreddit: String,
    #[serde(default)]
    pub created_utc: i64,
}

#[derive(Debug, Default)]
pub struct SimileHarvest {
    pub similes: Vec<SimileInstance>,
    /// Records that failed to parse or had an empty body.
    pub malformed: usize,
    pub sentences_seen: usize,
    pub duplicates: usize,
}

/// Dedup key: lowercased with punctuation stripped.
pub fn dedup_key(sentence: &str) -> String {
    text::normalize_key(sentence)
}

/// Splits every comment into sentences and keeps the ones that parse as
/// similes, first occurrence wins on duplicates. Comments are processed in
/// `(created_utc, id)` order so the output does not depend on input order.
/// Pronoun-topic noise such as "I feel like a fool" is kept.
pub fn harvest_similes(
    comments: impl IntoIterator<Item = RawComment>,
    cfg: &TriggerConfig,
) -> SimileHarvest {
    let mut malformed = 0;
    let mut comments: Vec<RawComment> = comments
        .into_iter()
        .filter(|c| {
            let ok = !c.body.trim().is_empty();
            malformed += usize::from(!ok);
            ok
        })
        .collect();
    comments.sort_by(|a, b| (a.created_utc, &a.id).cmp(&(b.created_utc, &b.id)));

    let per_comment: Vec<(usize, Vec<SimileInstance>)> = par::map(&comments, |c| {
        let sentences = text::split_sentences(&c.body);
        let found = sentences
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                parse_simile(s, cfg).map(|inst| inst.with_source_id(format!("{}#{}", c.id, i)))
            })
            .collect();
        (sentences.len(), found)
    });

    let mut seen = HashSet::new();
    let mut out = SimileHarvest {
        malformed,
        ..Default::default()
    };
    for (n, found) in per_comment {
        out.sentences_seen += n;
        for inst in found {
            if seen.insert(dedup_key(inst.raw_text())) {
                out.similes.push(inst);
            } else {
                out.duplicates += 1;
            }
        }
    }
    out
}

/// Reads a JSONL comment dump; unparseable lines count as malformed.
pub fn harvest_jsonl<R: BufRead>(reader: R, cfg: &TriggerConfig) -> std::io::Result<SimileHarvest> {
    let (comments, bad) = crate::jsonl::read_lenient::<RawComment, _>(reader)?;
    let mut h = harvest_similes(comments, cfg);
    h.malformed += bad;
    Ok(h)
}

#[derive(Debug, Default)]
pub struct LiteralHarvest {
    pub kept: Vec<LiteralSentence>,
    pub rejected_comparator: usize,
    pub rejected_not_modifier: usize,
}

/// Keeps comparator-free sentences whose last content word is an adjective
/// or adverb.
pub fn harvest_literals<S: AsRef<str> + Sync>(sentences: &[S], tagger: &dyn Tagger) -> LiteralHarvest {
    let parsed = par::map(sentences, |s| LiteralSentence::parse(s.as_ref().trim(), tagger));
    let mut out = LiteralHarvest::default();
    for p in parsed {
        match p {
            Ok(l) => out.kept.push(l),
            Err(SimileError::ContainsComparator(_)) => out.rejected_comparator += 1,
            Err(_) => out.rejected_not_modifier += 1,
        }
    }
    out
}

/// Seeded sample of `n` items without replacement, returned in input order.
pub fn sample<T: Clone>(items: &[T], n: usize, seed: u64) -> Vec<T> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, items.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit<T = SimileInstance> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub seed: u64,
}

/// Number of training items for `n` records at `ratio`: the ceiling of
/// `n * ratio`, treating values within float noise of an integer as that integer.
pub fn train_size(n: usize, ratio: f64) -> usize {
    let exact = n as f64 * ratio;
    let nearest = exact.round();
    let size = if (exact - nearest).abs() <= 1e-9 * exact.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    (size as usize).min(n)
}

/// Seeded shuffle, then the first [`train_size`] items go to training.
pub fn split_corpus<T>(items: Vec<T>, ratio: f64, seed: u64) -> Result<CorpusSplit<T>, HarvestError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(HarvestError::InvalidRatio(ratio));
    }
    if items.is_empty() {
        return Err(HarvestError::EmptyCorpus);
    }
    let mut items = items;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    let validation = items.split_off(train_size(items.len(), ratio));
    Ok(CorpusSplit {
        train: items,
        validation,
        seed,
    })
}
