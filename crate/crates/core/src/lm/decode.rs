use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Generation, GenerationConfig, Generator, LmError};
use crate::text;

/// End-of-output token emitted by reference models.
pub const END_TOKEN: &str = "</s>";

/// Autoregressive model exposing next-token log-scores.
pub trait NextTokenModel: Send + Sync {
    /// Candidate next tokens with unnormalized log-scores. An empty result
    /// ends decoding.
    fn next_token_scores(&self, source: &[String], decoded: &[String]) -> Vec<(String, f64)>;
}

/// RNG for one generate call, derived from the configured seed and the
/// source text so results do not depend on call order.
pub fn call_rng(seed: u64, source: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(source.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Top-k sampling with temperature. With a forced prefix the output starts
/// with that string verbatim and sampling continues after it.
pub fn decode<M: NextTokenModel + ?Sized>(
    model: &M,
    source: &str,
    cfg: &GenerationConfig,
) -> Result<Generation, LmError> {
    cfg.validate()?;
    let mut rng = call_rng(cfg.seed, source);
    let source_tokens = text::words(source);
    let prefix = cfg.forced_prefix.as_deref().unwrap_or("");
    let mut decoded = text::words(prefix);
    let mut new_tokens: Vec<String> = Vec::new();
    let mut finished = false;

    for _ in 0..cfg.max_new_tokens {
        let mut scores = model.next_token_scores(&source_tokens, &decoded);
        if scores.is_empty() {
            finished = true;
            break;
        }
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scores.truncate(cfg.top_k);
        let best = scores[0].1;
        let weights: Vec<f64> = scores
            .iter()
            .map(|(_, s)| ((s - best) / cfg.temperature).exp())
            .collect();
        let pick = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(&mut rng),
            Err(_) => 0,
        };
        let token = scores.swap_remove(pick).0;
        if token == END_TOKEN {
            finished = true;
            break;
        }
        decoded.push(token.clone());
        new_tokens.push(token);
    }

    Ok(Generation {
        text: text::append_tokens(prefix, &new_tokens),
        truncated: !finished,
    })
}

impl<M: NextTokenModel> Generator for M {
    fn generate(&self, source: &str, cfg: &GenerationConfig) -> Result<Generation, LmError> {
        decode(self, source, cfg)
    }
}
