use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::decode::{NextTokenModel, END_TOKEN};
use super::{LmError, Scorer};
use crate::text;

const START: &str = "<s>";
const UNK: &str = "<unk>";

/// Assigns probability 1/V to every token, so the perplexity of any text is V.
#[derive(Debug, Clone, Copy)]
pub struct UniformScorer {
    vocab_size: usize,
}

impl UniformScorer {
    pub fn new(vocab_size: usize) -> Self {
        assert!(vocab_size > 0, "vocabulary must be non-empty");
        Self { vocab_size }
    }
}

impl Scorer for UniformScorer {
    fn perplexity(&self, text: &str) -> Result<f64, LmError> {
        let n = text::words(text).len();
        if n == 0 {
            return Err(LmError::EmptyText);
        }
        let logp = -(self.vocab_size as f64).ln();
        let mean_nll = -(logp * n as f64) / n as f64;
        Ok(mean_nll.exp())
    }
}

/// Word bigram model with add-α smoothing, linearly interpolated with an
/// add-α unigram model:
///
/// `P(w | v) = λ (c(v,w) + α) / (c(v) + α|V|) + (1 - λ) (c(w) + α) / (N + α|V|)`
///
/// Tokens are lowercased. `|V|` counts the training vocabulary plus the end
/// token and `<unk>`. Scoring covers every token plus the end token.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BigramScorer {
    alpha: f64,
    lambda: f64,
    vocab: BTreeSet<String>,
    unigrams: BTreeMap<String, u64>,
    bigrams: BTreeMap<String, BTreeMap<String, u64>>,
    context_totals: BTreeMap<String, u64>,
    total_tokens: u64,
    sentences: usize,
}

impl BigramScorer {
    pub const DEFAULT_ALPHA: f64 = 0.1;
    pub const DEFAULT_LAMBDA: f64 = 0.5;

    pub fn train<S: AsRef<str>>(sentences: &[S]) -> Self {
        Self::train_with(sentences, Self::DEFAULT_ALPHA, Self::DEFAULT_LAMBDA)
    }

    pub fn train_with<S: AsRef<str>>(sentences: &[S], alpha: f64, lambda: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        assert!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1]");
        let mut m = BigramScorer {
            alpha,
            lambda,
            vocab: [END_TOKEN, UNK].iter().map(|s| s.to_string()).collect(),
            unigrams: BTreeMap::new(),
            bigrams: BTreeMap::new(),
            context_totals: BTreeMap::new(),
            total_tokens: 0,
            sentences: 0,
        };
        for s in sentences {
            let toks = Self::tokens(s.as_ref());
            if toks.len() == 1 {
                continue;
            }
            m.sentences += 1;
            let mut prev = START.to_string();
            for t in toks {
                m.vocab.insert(t.clone());
                *m.unigrams.entry(t.clone()).or_default() += 1;
                *m.bigrams.entry(prev.clone()).or_default().entry(t.clone()).or_default() += 1;
                *m.context_totals.entry(prev).or_default() += 1;
                m.total_tokens += 1;
                prev = t;
            }
        }
        m
    }

    /// Lowercased tokens followed by the end token.
    fn tokens(text: &str) -> Vec<String> {
        let mut toks: Vec<String> = text::words(text).iter().map(|w| w.to_lowercase()).collect();
        toks.push(END_TOKEN.to_string());
        toks
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn training_sentences(&self) -> usize {
        self.sentences
    }

    fn known<'a>(&self, w: &'a str) -> &'a str {
        if self.vocab.contains(w) {
            w
        } else {
            UNK
        }
    }

    pub fn prob(&self, prev: &str, word: &str) -> f64 {
        let v = self.vocab.len() as f64;
        let a = self.alpha;
        let c_w = self.unigrams.get(word).copied().unwrap_or(0) as f64;
        let p_uni = (c_w + a) / (self.total_tokens as f64 + a * v);
        let c_vw = self
            .bigrams
            .get(prev)
            .and_then(|m| m.get(word))
            .copied()
            .unwrap_or(0) as f64;
        let c_v = self.context_totals.get(prev).copied().unwrap_or(0) as f64;
        let p_bi = (c_vw + a) / (c_v + a * v);
        self.lambda * p_bi + (1.0 - self.lambda) * p_uni
    }

    /// Natural-log probability of each token (plus the end token).
    pub fn token_log_probs(&self, text: &str) -> Vec<f64> {
        let mut prev = START.to_string();
        Self::tokens(text)
            .into_iter()
            .map(|t| {
                let w = self.known(&t);
                let lp = self.prob(&prev, w).ln();
                prev = w.to_string();
                lp
            })
            .collect()
    }
}

impl Scorer for BigramScorer {
    fn perplexity(&self, text: &str) -> Result<f64, LmError> {
        if text::words(text).is_empty() {
            return Err(LmError::EmptyText);
        }
        let lps = self.token_log_probs(text);
        let mean_nll = -lps.iter().sum::<f64>() / lps.len() as f64;
        Ok(mean_nll.exp())
    }
}

/// Unconditional continuation: ignores the source and extends whatever has
/// been decoded (typically a forced prefix).
impl NextTokenModel for BigramScorer {
    fn next_token_scores(&self, _source: &[String], decoded: &[String]) -> Vec<(String, f64)> {
        let prev = decoded
            .last()
            .map(|w| self.known(&w.to_lowercase()).to_string())
            .unwrap_or_else(|| START.to_string());
        self.vocab
            .iter()
            .filter(|w| w.as_str() != UNK)
            .map(|w| (w.clone(), self.prob(&prev, w).ln()))
            .collect()
    }
}
