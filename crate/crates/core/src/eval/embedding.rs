use std::collections::HashMap;
use std::path::Path;

use super::EvalError;
use crate::text;

/// Token similarity used for greedy matching. Implementations return cosine
/// similarity of unit-norm token vectors.
pub trait Embedder: Send + Sync {
    fn similarity(&self, a: &str, b: &str) -> f64;
}

/// One vector per token type: similarity is 1 for equal tokens, else 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneHotEmbedder;

impl Embedder for OneHotEmbedder {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Hashed character 1-3-gram vectors over the boundary-marked token. Cheap,
/// deterministic and gives partial credit to tokens sharing spelling.
#[derive(Debug, Clone, Copy)]
pub struct CharNgramEmbedder {
    pub dim: usize,
}

impl Default for CharNgramEmbedder {
    fn default() -> Self {
        Self { dim: 512 }
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl CharNgramEmbedder {
    pub fn vector(&self, token: &str) -> Vec<f64> {
        let marked: Vec<char> = format!("<{token}>").chars().collect();
        let dim = self.dim.max(1);
        let mut v = vec![0.0; dim];
        for n in 1..=3 {
            for w in marked.windows(n) {
                let g: String = w.iter().collect();
                v[(fnv1a(&g) % dim as u64) as usize] += 1.0;
            }
        }
        unit(v)
    }
}

impl Embedder for CharNgramEmbedder {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        cosine(&self.vector(a), &self.vector(b))
    }
}

/// Pretrained vectors read from a whitespace-separated text file
/// (`word v1 v2 ...`, optional `count dim` header). Tokens missing from the
/// table fall back to one-hot similarity.
#[derive(Debug, Clone, Default)]
pub struct TableEmbedder {
    vectors: HashMap<String, Vec<f64>>,
}

impl TableEmbedder {
    pub fn from_vectors(vectors: impl IntoIterator<Item = (String, Vec<f64>)>) -> Self {
        Self {
            vectors: vectors.into_iter().map(|(w, v)| (w, unit(v))).collect(),
        }
    }

    pub fn parse(content: &str) -> Result<Self, String> {
        let mut dim = None;
        let mut vectors = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Result<Vec<f64>, _> = fields.map(str::parse).collect();
            let values = values.map_err(|e| format!("line {}: {e}", i + 1))?;
            if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() {
                continue;
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(format!("line {}: expected {d} values, found {}", i + 1, values.len()))
                }
                _ => {}
            }
            vectors.push((word.to_string(), values));
        }
        Ok(Self::from_vectors(vectors))
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let content = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&content).map_err(|message| EvalError::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl Embedder for TableEmbedder {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        match (self.vectors.get(a), self.vectors.get(b)) {
            (Some(x), Some(y)) => cosine(x, y),
            _ => OneHotEmbedder.similarity(a, b),
        }
    }
}

fn content_tokens(s: &str) -> Vec<String> {
    text::words(s)
        .into_iter()
        .filter(|t| !text::is_punct(t))
        .map(|t| t.to_lowercase())
        .collect()
}

fn greedy_f1(cand: &[String], reference: &[String], embedder: &dyn Embedder) -> f64 {
    if cand.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let sims: Vec<Vec<f64>> = cand
        .iter()
        .map(|c| reference.iter().map(|r| embedder.similarity(c, r)).collect())
        .collect();
    let precision = sims
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / cand.len() as f64;
    let recall = (0..reference.len())
        .map(|j| sims.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / reference.len() as f64;
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Greedy-matching embedding F1, maximised over references. An empty
/// candidate scores 0.
pub fn embedding_f1<S: AsRef<str>>(candidate: &str, references: &[S], embedder: &dyn Embedder) -> f64 {
    let cand = content_tokens(candidate);
    references
        .iter()
        .map(|r| greedy_f1(&cand, &content_tokens(r.as_ref()), embedder))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_is_overlap_f1() {
        assert!((embedding_f1("a b", &["a c"], &OneHotEmbedder) - 0.5).abs() < 1e-15);
        assert_eq!(embedding_f1("desert", &["sandy death trap", "wasteland"], &OneHotEmbedder), 0.0);
        assert_eq!(embedding_f1("", &["a"], &OneHotEmbedder), 0.0);
    }

    #[test]
    fn identity_scores_one() {
        for e in [&OneHotEmbedder as &dyn Embedder, &CharNgramEmbedder::default()] {
            assert!((embedding_f1("blue canvas", &["x", "blue canvas"], e) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn char_ngrams_give_partial_credit() {
        let e = CharNgramEmbedder::default();
        let v = e.vector("desert");
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(embedding_f1("desert", &["sandy death trap", "wasteland"], &e) > 0.0);
    }

    #[test]
    fn table_embedder_parses_and_falls_back() {
        let t = TableEmbedder::parse("2 2\ncold 1 0\nicy 1 1\n").unwrap();
        assert_eq!(t.len(), 2);
        assert!((t.similarity("cold", "icy") - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.similarity("cold", "warm"), 0.0);
        assert_eq!(t.similarity("warm", "warm"), 1.0);
        assert!(TableEmbedder::parse("a 1 2\nb 1\n").is_err());
    }
}
