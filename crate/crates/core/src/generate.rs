//! The four simile generators: the fine-tuned seq2seq system and three
//! baselines (prefix-forced pretrained decoding, knowledge retrieval and
//! metaphor masking). All of them take a literal sentence ending in an
//! adjective or adverb.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ParallelPair;
use crate::knowledge::{vehicle_for_property, SynonymTable, VehicleBackend};
use crate::lm::{self, Generation, GenerationConfig, Generator, LmError, TrainConfig, Trainer};
use crate::par;
use crate::simile::{strip_terminal_modifier, SimileError, StrippedSentence};
use crate::tagger::Tagger;

pub const MASK_TOKEN: &str = "<MASK>";

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Simile(#[from] SimileError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error("unknown system {0:?} (expected scope, bart, rtrvl or meta_m)")]
    UnknownSystem(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Seq2seq model fine-tuned on the literal → simile corpus.
    Scope,
    /// Pretrained decoder forced to start with `<prefix> like a`.
    Bart,
    /// Highest-weight HasProperty concept appended after `like a`.
    Rtrvl,
    /// Seq2seq model trained with the property masked out.
    MetaM,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [SystemKind::Scope, SystemKind::Bart, SystemKind::Rtrvl, SystemKind::MetaM];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Scope => "scope",
            SystemKind::Bart => "bart",
            SystemKind::Rtrvl => "rtrvl",
            SystemKind::MetaM => "meta_m",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GenerateError::UnknownSystem(s.to_string()))
    }
}

/// Article placed before retrieved vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticlePolicy {
    /// Always "a".
    #[default]
    Fixed,
    /// "an" before vowel-initial vehicles.
    Vowel,
}

impl ArticlePolicy {
    fn article_for(self, vehicle: &str) -> &'static str {
        let vowel = vehicle
            .chars()
            .next()
            .is_some_and(|c| "aeiouAEIOU".contains(c));
        match self {
            ArticlePolicy::Vowel if vowel => "an",
            _ => "a",
        }
    }
}

fn comparator_prefix(stripped: &StrippedSentence, article: &str) -> String {
    if stripped.prefix.is_empty() {
        format!("like {article}")
    } else {
        format!("{} like {article}", stripped.prefix)
    }
}

/// Free decoding from the literal.
pub fn scope_generate(literal: &str, model: &dyn Generator, cfg: &GenerationConfig) -> Result<Generation, GenerateError> {
    let cfg = GenerationConfig {
        forced_prefix: None,
        ..cfg.clone()
    };
    Ok(lm::generate(literal, &cfg, model)?)
}

/// `"The city was beautiful"` → `"The city was like a"`.
pub fn forced_prefix_for(literal: &str, tagger: &dyn Tagger) -> Result<String, GenerateError> {
    let stripped = strip_terminal_modifier(literal, tagger)?;
    Ok(comparator_prefix(&stripped, "a"))
}

pub fn baseline_prefix_forced(
    literal: &str,
    pretrained: &dyn Generator,
    cfg: &GenerationConfig,
    tagger: &dyn Tagger,
) -> Result<Generation, GenerateError> {
    let cfg = cfg.clone().with_forced_prefix(forced_prefix_for(literal, tagger)?);
    Ok(lm::generate(literal, &cfg, pretrained)?)
}

/// Retrieval output: the simile, or the bare `... like a` prefix marked blank
/// when neither the property nor its synonyms are in the knowledge base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retrieved {
    pub text: String,
    pub vehicle: Option<String>,
}

pub fn baseline_retrieval(
    literal: &str,
    knowledge: &dyn VehicleBackend,
    synonyms: &SynonymTable,
    tagger: &dyn Tagger,
    article: ArticlePolicy,
) -> Result<Option<String>, GenerateError> {
    Ok(retrieve(literal, knowledge, synonyms, tagger, article)?.vehicle.map(|_| {
        retrieve(literal, knowledge, synonyms, tagger, article)
            .expect("second lookup is identical")
            .text
    }))
}

/// Retrieval with the blank marker kept, for batch output.
pub fn retrieve(
    literal: &str,
    knowledge: &dyn VehicleBackend,
    synonyms: &SynonymTable,
    tagger: &dyn Tagger,
    article: ArticlePolicy,
) -> Result<Retrieved, GenerateError> {
    let stripped = strip_terminal_modifier(literal, tagger)?;
    Ok(match vehicle_for_property(&stripped.property, knowledge, synonyms) {
        Some(vehicle) => {
            let prefix = comparator_prefix(&stripped, article.article_for(&vehicle));
            Retrieved {
                text: format!("{prefix} {vehicle}{}", stripped.trailing),
                vehicle: Some(vehicle),
            }
        }
        None => Retrieved {
            text: comparator_prefix(&stripped, "a"),
            vehicle: None,
        },
    })
}

/// A literal with its property replaced by [`MASK_TOKEN`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedLiteral {
    pub masked: String,
    pub removed: String,
    stripped: StrippedSentence,
}

impl MaskedLiteral {
    /// The original literal.
    pub fn reconstruct(&self) -> String {
        self.stripped.rebuild_with(&self.removed)
    }
}

pub fn mask_literal(literal: &str, tagger: &dyn Tagger) -> Result<MaskedLiteral, GenerateError> {
    let stripped = strip_terminal_modifier(literal, tagger)?;
    Ok(MaskedLiteral {
        masked: stripped.rebuild_with(MASK_TOKEN),
        removed: stripped.property.clone(),
        stripped,
    })
}

#[derive(Debug)]
pub struct MaskedTraining<M> {
    pub model: M,
    /// Pairs whose source did not end in an adjective or adverb.
    pub skipped: usize,
}

/// Trains on (masked literal → simile). Unstrippable pairs are skipped.
pub fn train_metaphor_mask<T: Trainer>(
    pairs: &[ParallelPair],
    cfg: &TrainConfig,
    backend: &T,
    tagger: &dyn Tagger,
) -> Result<MaskedTraining<T::Model>, GenerateError> {
    let masked: Vec<Option<ParallelPair>> = par::map(pairs, |p| {
        mask_literal(&p.source, tagger).ok().map(|m| ParallelPair {
            source: m.masked,
            ..p.clone()
        })
    });
    let skipped = masked.iter().filter(|m| m.is_none()).count();
    let masked: Vec<ParallelPair> = masked.into_iter().flatten().collect();
    let model = lm::fine_tune(&masked, cfg, backend)?;
    Ok(MaskedTraining { model, skipped })
}

pub fn baseline_metaphor_mask(
    literal: &str,
    model: &dyn Generator,
    cfg: &GenerationConfig,
    tagger: &dyn Tagger,
) -> Result<Generation, GenerateError> {
    let masked = mask_literal(literal, tagger)?;
    scope_generate(&masked.masked, model, cfg)
}

/// Backends needed by a system.
#[derive(Clone, Copy)]
pub enum Backend<'a> {
    Model(&'a dyn Generator),
    Knowledge {
        edges: &'a dyn VehicleBackend,
        synonyms: &'a SynonymTable,
        article: ArticlePolicy,
    },
}

/// One configured generator behind a uniform call.
pub struct SimileSystem<'a> {
    pub kind: SystemKind,
    pub backend: Backend<'a>,
    pub tagger: &'a dyn Tagger,
    pub config: GenerationConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub literal: String,
    pub system: SystemKind,
    pub output: String,
    pub seed: u64,
    /// Retrieval miss: `output` is the bare comparator prefix.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub blank: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl<'a> SimileSystem<'a> {
    pub fn new(kind: SystemKind, backend: Backend<'a>, tagger: &'a dyn Tagger, config: GenerationConfig) -> Self {
        Self {
            kind,
            backend,
            tagger,
            config,
        }
    }

    pub fn run(&self, literal: &str) -> Result<GenerationRecord, GenerateError> {
        let record = |output: String, blank: bool, truncated: bool| GenerationRecord {
            literal: literal.to_string(),
            system: self.kind,
            output,
            seed: self.config.seed,
            blank,
            truncated,
        };
        let from_gen = |g: Generation| record(g.text, false, g.truncated);
        match (self.kind, self.backend) {
            (SystemKind::Scope, Backend::Model(m)) => scope_generate(literal, m, &self.config).map(from_gen),
            (SystemKind::Bart, Backend::Model(m)) => {
                baseline_prefix_forced(literal, m, &self.config, self.tagger).map(from_gen)
            }
            (SystemKind::MetaM, Backend::Model(m)) => {
                baseline_metaphor_mask(literal, m, &self.config, self.tagger).map(from_gen)
            }
            (SystemKind::Rtrvl, Backend::Knowledge { edges, synonyms, article }) => {
                let r = retrieve(literal, edges, synonyms, self.tagger, article)?;
                Ok(record(r.text, r.vehicle.is_none(), false))
            }
            (kind, _) => Err(LmError::InvalidConfig(format!("system {kind} was given the wrong kind of backend")).into()),
        }
    }

    /// Runs every literal; order follows input order.
    pub fn run_batch<S: AsRef<str> + Sync>(&self, literals: &[S]) -> BatchOutput {
        let results = par::map(literals, |l| self.run(l.as_ref()));
        let mut out = BatchOutput::default();
        for (lit, r) in literals.iter().zip(results) {
            match r {
                Ok(rec) => out.records.push(rec),
                Err(e) => out.failures.push((lit.as_ref().to_string(), e.to_string())),
            }
        }
        out
    }
}

#[derive(Debug, Default)]
pub struct BatchOutput {
    pub records: Vec<GenerationRecord>,
    pub failures: Vec<(String, String)>,
}

/// Any system able to turn a literal into a simile; `None` when it has nothing to offer.
pub trait SimileGenerator: Send + Sync {
    fn simile(&self, literal: &str) -> Result<Option<String>, GenerateError>;
}

impl SimileGenerator for SimileSystem<'_> {
    fn simile(&self, literal: &str) -> Result<Option<String>, GenerateError> {
        let r = self.run(literal)?;
        Ok((!r.blank).then_some(r.output))
    }
}

// Backends hold shared references to Sync trait objects only.
unsafe impl Send for Backend<'_> {}
unsafe impl Sync for Backend<'_> {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{EdgeTable, KnowledgeEdge};
    use crate::lm::{BigramScorer, TemplateTrainer};
    use crate::tagger::LexiconTagger;

    fn sunset() -> EdgeTable {
        EdgeTable::from_edges(vec![
            KnowledgeEdge { concept: "sunset".into(), property: "beautiful".into(), weight: 5.0 },
            KnowledgeEdge { concept: "rose".into(), property: "beautiful".into(), weight: 2.0 },
            KnowledgeEdge { concept: "owl".into(), property: "wise".into(), weight: 2.0 },
        ])
    }

    #[test]
    fn system_names_roundtrip() {
        for k in SystemKind::ALL {
            assert_eq!(k.as_str().parse::<SystemKind>().unwrap(), k);
        }
        assert!("gpt".parse::<SystemKind>().is_err());
        assert_eq!(serde_json::to_string(&SystemKind::MetaM).unwrap(), "\"meta_m\"");
    }

    #[test]
    fn retrieval_examples() {
        let t = LexiconTagger::new();
        let syn = SynonymTable::default();
        assert_eq!(
            baseline_retrieval("The city was beautiful", &sunset(), &syn, &t, ArticlePolicy::Fixed).unwrap().as_deref(),
            Some("The city was like a sunset")
        );
        assert_eq!(
            baseline_retrieval("I start to prowl across the room warily", &sunset(), &syn, &t, ArticlePolicy::Fixed).unwrap(),
            None
        );
        assert_eq!(
            baseline_retrieval("The city was beautiful", &EdgeTable::default(), &syn, &t, ArticlePolicy::Fixed).unwrap(),
            None
        );
        assert_eq!(
            baseline_retrieval("He was wise.", &sunset(), &syn, &t, ArticlePolicy::Vowel).unwrap().as_deref(),
            Some("He was like an owl.")
        );
        let blank = retrieve("He was quiet", &sunset(), &syn, &t, ArticlePolicy::Fixed).unwrap();
        assert_eq!(blank.text, "He was like a");
        assert!(blank.vehicle.is_none());
    }

    #[test]
    fn forced_prefix_construction() {
        let t = LexiconTagger::new();
        assert_eq!(forced_prefix_for("The city was beautiful", &t).unwrap(), "The city was like a");
        assert!(matches!(
            forced_prefix_for("He saw a dog", &t),
            Err(GenerateError::Simile(SimileError::NotModifierFinal { .. }))
        ));
        let lm = BigramScorer::train(&["the sky was like a painting .", "he ran like a deer ."]);
        for seed in 0..20 {
            let g = baseline_prefix_forced("The city was beautiful", &lm, &GenerationConfig::default().with_seed(seed), &t)
                .unwrap();
            assert!(g.text.starts_with("The city was like a"));
        }
    }

    #[test]
    fn masking_is_reversible() {
        let t = LexiconTagger::new();
        let m = mask_literal("The city was beautiful", &t).unwrap();
        assert_eq!(m.masked, "The city was <MASK>");
        assert_eq!(m.removed, "beautiful");
        assert_eq!(m.reconstruct(), "The city was beautiful");
        let m = mask_literal("It was loud!", &t).unwrap();
        assert_eq!(m.masked, "It was <MASK>!");
        assert_eq!(m.masked.matches(MASK_TOKEN).count(), 1);
        assert_eq!(m.reconstruct(), "It was loud!");
    }

    #[test]
    fn metaphor_mask_training() {
        let t = LexiconTagger::new();
        let pairs = vec![
            ParallelPair::new("The city was beautiful", "The city was like a painting"),
            ParallelPair::new("He saw a dog", "He saw a dog like a wolf"),
        ];
        let trained = train_metaphor_mask(&pairs, &TrainConfig::default(), &TemplateTrainer, &t).unwrap();
        assert_eq!(trained.skipped, 1);
        let g = baseline_metaphor_mask(
            "The town was beautiful",
            &trained.model,
            &GenerationConfig { top_k: 1, ..Default::default() },
            &t,
        )
        .unwrap();
        assert_eq!(g.text, "The town was like a painting");

        let none = vec![ParallelPair::new("He saw a dog", "He saw a dog like a wolf")];
        assert!(matches!(
            train_metaphor_mask(&none, &TrainConfig::default(), &TemplateTrainer, &t),
            Err(GenerateError::Lm(LmError::EmptyTrainingSet))
        ));
    }

    #[test]
    fn batch_records_and_failures() {
        let t = LexiconTagger::new();
        let syn = SynonymTable::default();
        let table = sunset();
        let sys = SimileSystem::new(
            SystemKind::Rtrvl,
            Backend::Knowledge { edges: &table, synonyms: &syn, article: ArticlePolicy::Fixed },
            &t,
            GenerationConfig::default().with_seed(9),
        );
        let out = sys.run_batch(&["The city was beautiful", "It was quiet", "He saw a dog"]);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].output, "The city was like a sunset");
        assert!(out.records[1].blank);
        assert_eq!(out.failures.len(), 1);
        let line = serde_json::to_string(&out.records[0]).unwrap();
        assert_eq!(line, r#"{"literal":"The city was beautiful","system":"rtrvl","output":"The city was like a sunset","seed":9}"#);
        assert_eq!(sys.simile("It was quiet").unwrap(), None);
    }
}
