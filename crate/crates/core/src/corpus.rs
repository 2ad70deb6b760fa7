//! Simile → literal transformation and parallel-corpus emission.
//!
//! For each simile the vehicle's commonsense properties are appended to the
//! simile prefix to form literal candidates. The candidate with the lowest
//! perplexity is kept, a grammar-correction hook is applied to it, and the
//! result is paired with the original simile.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{properties_of, KnowledgeError, PropertyBackend, PropertyCandidate};
use crate::lm::remote::{BackendRequest, RemoteLm, TextResponse};
use crate::lm::{LmError, Scorer};
use crate::par;
use crate::simile::{SimileInstance, TriggerConfig};
use crate::text;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no properties for vehicle {0:?}")]
    NoProperties(String),
    #[error("no literal candidates to rank")]
    NoCandidates,
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error("literal {0:?} still contains a comparator")]
    ComparatorInSource(String),
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One literal → simile training record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub property_used: String,
    #[serde(default)]
    pub vehicle: String,
    #[serde(default)]
    pub provenance: String,
}

impl ParallelPair {
    /// A bare pair without provenance fields.
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            property_used: String::new(),
            vehicle: String::new(),
            provenance: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralCandidate {
    pub text: String,
    pub property: String,
    /// Position of the property in the knowledge backend's ranking.
    pub rank: usize,
    pub perplexity: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct CandidatePolicy {
    /// Remove a comma that directly precedes the comparator. Off by default:
    /// "calm and quiet, like a breeze" becomes "calm and quiet, very relaxed".
    pub drop_comma_before_comparator: bool,
}

pub fn make_literal_candidates(
    simile: &SimileInstance,
    properties: &[PropertyCandidate],
) -> Result<Vec<LiteralCandidate>, CorpusError> {
    make_literal_candidates_with(simile, properties, &CandidatePolicy::default())
}

/// One candidate per property: simile prefix + property + the simile's
/// terminal punctuation.
pub fn make_literal_candidates_with(
    simile: &SimileInstance,
    properties: &[PropertyCandidate],
    policy: &CandidatePolicy,
) -> Result<Vec<LiteralCandidate>, CorpusError> {
    if properties.is_empty() {
        return Err(CorpusError::NoProperties(simile.vehicle_phrase().to_string()));
    }
    let mut prefix = simile.prefix();
    if policy.drop_comma_before_comparator {
        prefix = prefix.strip_suffix(',').unwrap_or(prefix).trim_end();
    }
    let punct = simile.terminal_punct();
    Ok(properties
        .iter()
        .enumerate()
        .map(|(rank, p)| {
            let property = p.text.trim();
            let body = if prefix.is_empty() {
                property.to_string()
            } else {
                format!("{prefix} {property}")
            };
            LiteralCandidate {
                text: format!("{body}{punct}"),
                property: property.to_string(),
                rank,
                perplexity: None,
            }
        })
        .collect())
}

/// Lowest-perplexity candidate; ties go to the better-ranked property.
pub fn select_best_literal(
    candidates: &[LiteralCandidate],
    scorer: &dyn Scorer,
) -> Result<LiteralCandidate, CorpusError> {
    let mut best: Option<LiteralCandidate> = None;
    for c in candidates {
        let ppl = crate::lm::perplexity(&c.text, scorer)?;
        let better = match &best {
            None => true,
            Some(b) => {
                let bp = b.perplexity.unwrap_or(f64::INFINITY);
                ppl < bp || (ppl == bp && c.rank < b.rank)
            }
        };
        if better {
            best = Some(LiteralCandidate {
                perplexity: Some(ppl),
                ..c.clone()
            });
        }
    }
    best.ok_or(CorpusError::NoCandidates)
}

#[derive(Debug, Error)]
#[error("{0}")]
pub struct CorrectorError(pub String);

/// Grammar-correction hook applied to the selected literal.
pub trait GrammarCorrector: Send + Sync {
    fn correct(&self, text: &str) -> Result<String, CorrectorError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityCorrector;

impl GrammarCorrector for IdentityCorrector {
    fn correct(&self, text: &str) -> Result<String, CorrectorError> {
        Ok(text.to_string())
    }
}

/// Token-level replacements (`wrong<TAB>right`), case-insensitive on the
/// left-hand side. Everything else in the text is left untouched.
#[derive(Debug, Clone, Default)]
pub struct ReplacementCorrector {
    replacements: HashMap<String, String>,
}

impl ReplacementCorrector {
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            replacements: pairs
                .into_iter()
                .map(|(a, b)| (a.to_lowercase(), b.to_string()))
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let content = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut pairs = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line.split_once('\t').ok_or_else(|| CorpusError::Format {
                path: path.display().to_string(),
                line: idx + 1,
                message: "expected wrong<TAB>right".into(),
            })?;
            pairs.push((a.trim(), b.trim()));
        }
        Ok(Self::new(pairs))
    }
}

impl GrammarCorrector for ReplacementCorrector {
    fn correct(&self, input: &str) -> Result<String, CorrectorError> {
        let mut out = String::with_capacity(input.len());
        let mut last = 0;
        for tok in text::tokenize(input) {
            if let Some(rep) = self.replacements.get(&tok.text.to_lowercase()) {
                out.push_str(&input[last..tok.start]);
                out.push_str(rep);
                last = tok.end;
            }
        }
        out.push_str(&input[last..]);
        Ok(out)
    }
}

impl GrammarCorrector for RemoteLm {
    fn correct(&self, text: &str) -> Result<String, CorrectorError> {
        self.call::<TextResponse>(&BackendRequest::Correct { text: text.into() })
            .map(|r| r.text)
            .map_err(|e| CorrectorError(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corrected {
    pub text: String,
    /// Set when the corrector failed and the input was kept.
    pub warning: Option<String>,
}

pub fn correct_grammar(text: &str, corrector: &dyn GrammarCorrector) -> Corrected {
    match corrector.correct(text) {
        Ok(t) => Corrected { text: t, warning: None },
        Err(e) => Corrected {
            text: text.to_string(),
            warning: Some(format!("grammar correction failed, input kept: {e}")),
        },
    }
}

#[derive(Debug, Clone)]
pub struct CorpusOptions {
    /// Properties requested per vehicle.
    pub k: usize,
    pub policy: CandidatePolicy,
    /// Used to check that emitted sources are comparator-free.
    pub triggers: TriggerConfig,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            k: 5,
            policy: CandidatePolicy::default(),
            triggers: TriggerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemFailure {
    pub source_id: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct CorpusBuild {
    pub pairs: Vec<ParallelPair>,
    /// Similes whose vehicle had no known properties.
    pub skipped_no_properties: usize,
    pub failures: Vec<ItemFailure>,
    pub warnings: Vec<ItemFailure>,
}

enum Outcome {
    Pair(ParallelPair, Option<String>),
    Skipped,
    Failed(String),
}

fn transform(
    simile: &SimileInstance,
    knowledge: &dyn PropertyBackend,
    scorer: &dyn Scorer,
    corrector: &dyn GrammarCorrector,
    opts: &CorpusOptions,
) -> Result<Outcome, CorpusError> {
    let props = properties_of(simile.vehicle_phrase(), opts.k, knowledge)?;
    if props.is_empty() {
        return Ok(Outcome::Skipped);
    }
    let candidates = make_literal_candidates_with(simile, &props, &opts.policy)?;
    let best = select_best_literal(&candidates, scorer)?;
    let corrected = correct_grammar(&best.text, corrector);
    if opts.triggers.find_in(&text::words(&corrected.text)).is_some() {
        return Err(CorpusError::ComparatorInSource(corrected.text));
    }
    Ok(Outcome::Pair(
        ParallelPair {
            source: corrected.text,
            target: simile.raw_text().to_string(),
            property_used: best.property,
            vehicle: simile.vehicle_phrase().to_string(),
            provenance: simile.source_id().to_string(),
        },
        corrected.warning,
    ))
}

/// Runs the transformation over every simile. Per-item failures are
/// recorded and never abort the batch; output order follows input order.
pub fn build_parallel_corpus(
    similes: &[SimileInstance],
    knowledge: &dyn PropertyBackend,
    scorer: &dyn Scorer,
    corrector: &dyn GrammarCorrector,
    opts: &CorpusOptions,
) -> CorpusBuild {
    let outcomes = par::map(similes, |s| {
        transform(s, knowledge, scorer, corrector, opts).unwrap_or_else(|e| Outcome::Failed(e.to_string()))
    });
    let mut out = CorpusBuild::default();
    for (simile, outcome) in similes.iter().zip(outcomes) {
        let id = simile.source_id().to_string();
        match outcome {
            Outcome::Pair(pair, warning) => {
                if let Some(message) = warning {
                    log::warn!("{id}: {message}");
                    out.warnings.push(ItemFailure { source_id: id, message });
                }
                out.pairs.push(pair);
            }
            Outcome::Skipped => out.skipped_no_properties += 1,
            Outcome::Failed(message) => out.failures.push(ItemFailure { source_id: id, message }),
        }
    }
    out
}

fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// `source<TAB>target` lines for trainers.
pub fn write_pairs_tsv(path: &Path, pairs: &[ParallelPair]) -> Result<(), CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for p in pairs {
        writeln!(w, "{}\t{}", tsv_field(&p.source), tsv_field(&p.target)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_pairs_tsv(path: &Path) -> Result<Vec<ParallelPair>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let (s, t) = line.split_once('\t').ok_or_else(|| CorpusError::Format {
            path: path.display().to_string(),
            line: idx + 1,
            message: "expected source<TAB>target".into(),
        })?;
        pairs.push(ParallelPair::new(s, t));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{EdgeTable, KnowledgeEdge};
    use crate::lm::{BigramScorer, UniformScorer};
    use crate::simile::parse_simile;

    fn simile(s: &str) -> SimileInstance {
        parse_simile(s, &TriggerConfig::default()).unwrap()
    }

    fn props(list: &[&str]) -> Vec<PropertyCandidate> {
        list.iter()
            .enumerate()
            .map(|(i, p)| PropertyCandidate {
                text: p.to_string(),
                score: (list.len() - i) as f64,
            })
            .collect()
    }

    /// Prefers one exact text, everything else scores worse.
    struct Prefer(&'static str);
    impl Scorer for Prefer {
        fn perplexity(&self, text: &str) -> Result<f64, LmError> {
            Ok(if text == self.0 { 1.0 } else { 10.0 })
        }
    }

    #[test]
    fn candidates_follow_prefix_property_punct() {
        let c = make_literal_candidates(
            &simile("Love is like a unicorn."),
            &props(&["very rare", "rare", "beautiful", "beautiful and smart", "color"]),
        )
        .unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c[1].text, "Love is rare.");
        let c = make_literal_candidates(
            &simile("It was cool and quiet, and I stormed through like a charging bull."),
            &props(&["fast"]),
        )
        .unwrap();
        assert_eq!(c[0].text, "It was cool and quiet, and I stormed through fast.");
        assert!(matches!(
            make_literal_candidates(&simile("Love is like a unicorn."), &[]),
            Err(CorpusError::NoProperties(_))
        ));
    }

    #[test]
    fn comma_policy() {
        let s = simile("Sir Francis's voice was calm and quiet, like a breeze through a forest.");
        let keep = make_literal_candidates(&s, &props(&["very relax"])).unwrap();
        assert_eq!(keep[0].text, "Sir Francis's voice was calm and quiet, very relax.");
        let drop = make_literal_candidates_with(
            &s,
            &props(&["very relax"]),
            &CandidatePolicy { drop_comma_before_comparator: true },
        )
        .unwrap();
        assert_eq!(drop[0].text, "Sir Francis's voice was calm and quiet very relax.");
    }

    #[test]
    fn selection() {
        let c = make_literal_candidates(&simile("Love is like a unicorn."), &props(&["very rare", "rare"])).unwrap();
        assert_eq!(select_best_literal(&c, &Prefer("Love is rare.")).unwrap().property, "rare");
        assert_eq!(select_best_literal(&c[..1], &UniformScorer::new(3)).unwrap().text, c[0].text);
        assert!(matches!(select_best_literal(&[], &UniformScorer::new(3)), Err(CorpusError::NoCandidates)));
    }

    #[test]
    fn perplexity_tie_goes_to_rank() {
        // Symmetric texts: "x is p." vs "x is q." with p, q unseen → equal perplexity.
        let scorer = BigramScorer::train(&["x is here."]);
        let c = make_literal_candidates(&simile("X is like a thing."), &props(&["zed", "qux"])).unwrap();
        let pa = crate::lm::perplexity(&c[0].text, &scorer).unwrap();
        let pb = crate::lm::perplexity(&c[1].text, &scorer).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(select_best_literal(&c, &scorer).unwrap().rank, 0);
        let reversed: Vec<_> = c.iter().rev().cloned().collect();
        assert_eq!(select_best_literal(&reversed, &scorer).unwrap().rank, 0);
    }

    struct Broken;
    impl GrammarCorrector for Broken {
        fn correct(&self, _: &str) -> Result<String, CorrectorError> {
            Err(CorrectorError("model offline".into()))
        }
    }

    #[test]
    fn correction_hook() {
        assert_eq!(correct_grammar("x y", &IdentityCorrector).text, "x y");
        let fix = ReplacementCorrector::new([("relax", "relaxed")]);
        assert_eq!(
            correct_grammar("Sir Francis's voice was calm and quiet, very relax.", &fix).text,
            "Sir Francis's voice was calm and quiet, very relaxed."
        );
        let c = correct_grammar("keep me", &Broken);
        assert_eq!(c.text, "keep me");
        assert!(c.warning.unwrap().contains("model offline"));
    }

    #[test]
    fn build_skips_unknown_vehicles_and_records_warnings() {
        let table = EdgeTable::from_edges(vec![KnowledgeEdge {
            concept: "unicorn".into(),
            property: "rare".into(),
            weight: 1.0,
        }]);
        let similes = vec![
            simile("Love is like a unicorn.").with_source_id("a"),
            simile("He is like a griffin.").with_source_id("b"),
        ];
        let b = build_parallel_corpus(&similes, &table, &UniformScorer::new(5), &Broken, &CorpusOptions::default());
        assert_eq!(b.pairs.len(), 1);
        assert_eq!(b.pairs[0].source, "Love is rare.");
        assert_eq!(b.pairs[0].provenance, "a");
        assert_eq!(b.pairs[0].vehicle, "unicorn");
        assert_eq!(b.skipped_no_properties, 1);
        assert_eq!(b.warnings.len(), 1);
    }

    #[test]
    fn comparator_in_source_is_a_failure() {
        let table = EdgeTable::from_edges(vec![KnowledgeEdge {
            concept: "unicorn".into(),
            property: "like a dream".into(),
            weight: 1.0,
        }]);
        let b = build_parallel_corpus(
            &[simile("Love is like a unicorn.")],
            &table,
            &UniformScorer::new(5),
            &IdentityCorrector,
            &CorpusOptions::default(),
        );
        assert!(b.pairs.is_empty());
        assert_eq!(b.failures.len(), 1);
    }

    #[test]
    fn tsv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pairs.tsv");
        let pairs = vec![ParallelPair::new("a\tb", "c like a d")];
        write_pairs_tsv(&p, &pairs).unwrap();
        let back = read_pairs_tsv(&p).unwrap();
        assert_eq!(back[0].source, "a b");
        assert_eq!(back[0].target, "c like a d");
    }
}
