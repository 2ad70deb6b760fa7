//! TOML configuration. Every command has a section whose keys mirror its
//! flags; flags override file values. Validation collects every problem
//! before reporting.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

/// Fills each `None` field of `$dst` from `$src`.
macro_rules! fill {
    ($dst:expr, $src:expr; $($f:ident),+ $(,)?) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )+
    };
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub simile: SimileSection,
    #[serde(default)]
    pub harvest: HarvestArgs,
    #[serde(default)]
    pub corpus: CorpusArgs,
    #[serde(default)]
    pub train: TrainArgs,
    #[serde(default)]
    pub generate: GenerateArgs,
    #[serde(default)]
    pub evaluate: EvaluateArgs,
    #[serde(default)]
    pub embellish: EmbellishArgs,
}

impl ConfigFile {
    pub fn parse(content: &str) -> Result<Self, String> {
        let table: toml::Table = content.parse().map_err(|e: toml::de::Error| e.to_string())?;
        // serde cannot deny unknown keys through a flattened struct
        for (section, own) in [("generate", GENERATE_KEYS), ("embellish", EMBELLISH_KEYS)] {
            if let Some(toml::Value::Table(t)) = table.get(section) {
                if let Some(k) = t.keys().find(|k| !own.contains(&k.as_str()) && !SYSTEM_KEYS.contains(&k.as_str())) {
                    return Err(format!("unknown key `{k}` in [{section}]"));
                }
            }
        }
        table.try_into().map_err(|e: toml::de::Error| e.to_string())
    }
}

const SYSTEM_KEYS: &[&str] = &[
    "system",
    "model_dir",
    "backend_command",
    "knowledge",
    "synonyms",
    "article",
    "top_k",
    "temperature",
    "max_new_tokens",
];
const GENERATE_KEYS: &[&str] = &["input", "output", "seed"];
const EMBELLISH_KEYS: &[&str] = &["stories", "output", "seed"];

/// Shared parsing settings.
#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct SimileSection {
    /// Comparator phrases, e.g. "like a".
    #[arg(long = "trigger", global = true)]
    #[serde(default)]
    pub triggers: Vec<String>,
    #[arg(long, global = true)]
    pub case_sensitive: Option<bool>,
    /// Extra tagger lexicon, `word<TAB>TAG` per line.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
}

impl SimileSection {
    pub fn merge(&mut self, file: &SimileSection) {
        if self.triggers.is_empty() {
            self.triggers = file.triggers.clone();
        }
        fill!(self, file; case_sensitive, lexicon);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct HarvestArgs {
    /// Comment dump, one JSON object per line.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Harvested similes (JSONL).
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    /// Train fraction; enables the split outputs.
    #[arg(long)]
    pub split_ratio: Option<f64>,
    #[arg(long)]
    pub train_out: Option<PathBuf>,
    #[arg(long)]
    pub validation_out: Option<PathBuf>,
    /// Candidate literal sentences, one per line.
    #[arg(long)]
    pub literals: Option<PathBuf>,
    #[arg(long)]
    pub literals_out: Option<PathBuf>,
    /// Keep a seeded sample of this many literals.
    #[arg(long)]
    pub literal_sample: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl HarvestArgs {
    pub fn merge(&mut self, f: &HarvestArgs) {
        fill!(self, f; input, output, split_ratio, train_out, validation_out, literals, literals_out, literal_sample, seed);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct CorpusArgs {
    /// Harvested similes (JSONL).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// HasProperty edge table (TSV).
    #[arg(long)]
    pub knowledge: Option<PathBuf>,
    /// Command of a line-JSON commonsense model, used instead of `knowledge`.
    #[arg(long)]
    pub knowledge_command: Option<String>,
    /// reference, uniform or remote.
    #[arg(long)]
    pub scorer: Option<String>,
    /// Sentences for the reference scorer; defaults to the input similes.
    #[arg(long)]
    pub scorer_text: Option<PathBuf>,
    /// identity, remote or a replacement table path.
    #[arg(long)]
    pub corrector: Option<String>,
    /// Command of the line-JSON language-model backend.
    #[arg(long)]
    pub backend_command: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub drop_comma: Option<bool>,
    /// Parallel pairs (TSV).
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    /// Audit log (JSONL); defaults to `<out>.audit.jsonl`.
    #[arg(long)]
    pub audit: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CorpusArgs {
    pub fn merge(&mut self, f: &CorpusArgs) {
        fill!(self, f; input, knowledge, knowledge_command, scorer, scorer_text, corrector, backend_command, k, drop_comma, output, audit, seed);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    /// Parallel pairs (TSV).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// template, bigram or remote.
    #[arg(long)]
    pub kind: Option<String>,
    /// Sentences for a bigram model; defaults to the pair targets.
    #[arg(long)]
    pub text: Option<PathBuf>,
    #[arg(long)]
    pub backend_command: Option<String>,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub batch_token_budget: Option<u32>,
    /// Train on masked sources for the metaphor-masking baseline.
    #[arg(long)]
    pub metaphor_mask: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl TrainArgs {
    pub fn merge(&mut self, f: &TrainArgs) {
        fill!(self, f; pairs, model_dir, kind, text, backend_command, epochs, batch_token_budget, metaphor_mask, seed);
    }
}

/// How a generation system is assembled.
#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct SystemArgs {
    /// scope, bart, rtrvl or meta_m.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// Line-JSON backend; `model_dir` is passed to it as the model name.
    #[arg(long)]
    pub backend_command: Option<String>,
    #[arg(long)]
    pub knowledge: Option<PathBuf>,
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    /// fixed or vowel.
    #[arg(long)]
    pub article: Option<String>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_new_tokens: Option<usize>,
}

impl SystemArgs {
    pub fn merge(&mut self, f: &SystemArgs) {
        fill!(self, f; system, model_dir, backend_command, knowledge, synonyms, article, top_k, temperature, max_new_tokens);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Literal sentences, one per line.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Generation records (JSONL).
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl GenerateArgs {
    pub fn merge(&mut self, f: &GenerateArgs) {
        self.system.merge(&f.system);
        fill!(self, f; input, output, seed);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct EvaluateArgs {
    /// Generation record files (JSONL).
    #[arg(long = "generated", value_delimiter = ',')]
    #[serde(default)]
    pub generated: Vec<PathBuf>,
    /// Systems to report, comma separated; defaults to all present.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub systems: Vec<String>,
    /// Reference similes (JSONL `{literal, references}`).
    #[arg(long)]
    pub refs: Option<PathBuf>,
    /// Training pairs (TSV) for novelty.
    #[arg(long)]
    pub training_pairs: Option<PathBuf>,
    /// onehot, char or a vectors file.
    #[arg(long)]
    pub embedder: Option<String>,
    /// none or add_one.
    #[arg(long)]
    pub smoothing: Option<String>,
    /// Metric report (JSON).
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    /// Formatted table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Human score sheet (CSV) to aggregate alongside.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Reference system for pairwise comparisons.
    #[arg(long)]
    pub baseline_against: Option<String>,
}

impl EvaluateArgs {
    pub fn merge(&mut self, f: &EvaluateArgs) {
        if self.generated.is_empty() {
            self.generated = f.generated.clone();
        }
        if self.systems.is_empty() {
            self.systems = f.systems.clone();
        }
        fill!(self, f; refs, training_pairs, embedder, smoothing, output, table, scores, baseline_against);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
pub struct EmbellishArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Stories (JSONL `{title, storyline, sentences}`).
    #[arg(long)]
    pub stories: Option<PathBuf>,
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl EmbellishArgs {
    pub fn merge(&mut self, f: &EmbellishArgs, generate: &GenerateArgs) {
        self.system.merge(&f.system);
        self.system.merge(&generate.system);
        fill!(self, f; stories, output, seed);
    }
}

/// Accumulates validation problems.
#[derive(Debug, Default)]
pub struct Problems(pub Vec<String>);

impl Problems {
    pub fn require<'a, T>(&mut self, value: &'a Option<T>, key: &str, flag: &str) -> Option<&'a T> {
        if value.is_none() {
            self.0.push(format!("missing key {key} (or {flag})"));
        }
        value.as_ref()
    }

    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.0.push(message());
        }
    }

    pub fn push(&mut self, message: String) {
        self.0.push(message);
    }

    pub fn exists(&mut self, path: Option<&PathBuf>, key: &str) {
        if let Some(p) = path {
            self.check(Path::new(p).exists(), || format!("{key}: {} does not exist", p.display()));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c = ConfigFile::parse(
            r#"
            [simile]
            triggers = ["like a", "like an"]

            [corpus]
            input = "similes.jsonl"
            k = 3

            [generate]
            system = "scope"
            top_k = 5
            seed = 7
            "#,
        )
        .unwrap();
        assert_eq!(c.simile.triggers.len(), 2);
        assert_eq!(c.corpus.k, Some(3));
        assert_eq!(c.generate.system.system.as_deref(), Some("scope"));
        assert_eq!(c.generate.seed, Some(7));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ConfigFile::parse("[corpus]\nknowledg = \"x\"\n").unwrap_err();
        assert!(e.contains("knowledg"), "{e}");
        let e = ConfigFile::parse("[generate]\nsed = 1\n").unwrap_err();
        assert!(e.contains("sed"), "{e}");
        assert!(ConfigFile::parse("[generate]\nseed = 1\nsystem = \"bart\"\n").is_ok());
    }

    #[test]
    fn flags_override_file() {
        let mut args = CorpusArgs { k: Some(2), ..Default::default() };
        let file = CorpusArgs {
            k: Some(9),
            input: Some("a".into()),
            ..Default::default()
        };
        args.merge(&file);
        assert_eq!(args.k, Some(2));
        assert_eq!(args.input, Some(PathBuf::from("a")));
    }

    #[test]
    fn problems_collect_all() {
        let mut p = Problems::default();
        p.require::<u64>(&None, "[generate].seed", "--seed");
        p.require::<PathBuf>(&None, "[generate].in", "--in");
        assert_eq!(p.0.len(), 2);
        assert!(p.0[0].contains("[generate].seed"));
    }
}
