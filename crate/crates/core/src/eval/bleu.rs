use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// How zero n-gram precisions are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// Any zero precision makes the score zero.
    #[default]
    None,
    /// Add one to matches and totals for orders above 1.
    AddOne,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU up to order `n` with uniform weights and the
/// closest-reference-length brevity penalty, without smoothing.
pub fn vehicle_bleu<S: AsRef<str>>(candidates: &[Vec<S>], references: &[Vec<Vec<S>>], n: usize) -> Result<f64, EvalError> {
    vehicle_bleu_with(candidates, references, n, Smoothing::None)
}

pub fn vehicle_bleu_with<S: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<Vec<S>>],
    n: usize,
    smoothing: Smoothing,
) -> Result<f64, EvalError> {
    if candidates.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if n == 0 {
        return Err(EvalError::InvalidOrder(n));
    }
    let mut matches = vec![0usize; n];
    let mut totals = vec![0usize; n];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;
    for (cand, refs) in candidates.iter().zip(references) {
        cand_len += cand.len();
        // closest reference length, shorter on ties
        ref_len += refs
            .iter()
            .map(Vec::len)
            .min_by_key(|&r| (r.abs_diff(cand.len()), r))
            .unwrap_or(0);
        for k in 1..=n {
            let cand_counts = ngram_counts(cand, k);
            let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
            for r in refs {
                for (g, c) in ngram_counts(r, k) {
                    let e = max_ref.entry(g).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            for (g, c) in &cand_counts {
                matches[k - 1] += (*c).min(max_ref.get(g).copied().unwrap_or(0));
                totals[k - 1] += c;
            }
        }
    }
    if cand_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for k in 0..n {
        let (m, t) = match smoothing {
            Smoothing::AddOne if k > 0 => (matches[k] + 1, totals[k] + 1),
            _ => (matches[k], totals[k]),
        };
        if m == 0 || t == 0 {
            return Ok(0.0);
        }
        log_sum += (m as f64 / t as f64).ln();
    }
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(bp * (log_sum / n as f64).exp())
}
