//! Command-line orchestration. Each subcommand resolves its settings from
//! flags and the TOML config, runs one pipeline stage and writes a run
//! manifest next to its primary output.

pub mod config;
pub mod manifest;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::corpus::{
    self, build_parallel_corpus, CandidatePolicy, CorpusError, CorpusOptions, GrammarCorrector, IdentityCorrector,
    ReplacementCorrector,
};
use crate::eval::{
    evaluate_system, mean_scores, pairwise_compare, sheet_alpha, CharNgramEmbedder, Criterion, Embedder,
    EvalError, GoldItem, MetricReport, OneHotEmbedder, ScoreSheet, Smoothing, SystemInputs, TableEmbedder,
};
use crate::generate::{self, ArticlePolicy, Backend, GenerateError, GenerationRecord, SimileSystem, SystemKind};
use crate::harvest::{self, HarvestError};
use crate::jsonl::{self, JsonlError};
use crate::knowledge::{load_edge_table, EdgeTable, KnowledgeError, PropertyBackend, RemoteKnowledge, SynonymTable};
use crate::lm::remote::{RemoteLm, RemoteTrainer};
use crate::lm::{self, BigramScorer, GenerationConfig, Generator, LmError, ReferenceModel, Scorer, TemplateTrainer, TrainConfig, UniformScorer};
use crate::remote::RemoteError;
use crate::simile::{parse_simile, strip_terminal_modifier, SimileRecord, TriggerConfig};
use crate::story::{self, StoryError};
use crate::tagger::{LexiconTagger, TaggerError};

use config::{
    ConfigFile, CorpusArgs, EmbellishArgs, EvaluateArgs, GenerateArgs, HarvestArgs, Problems, SimileSection,
    SystemArgs, TrainArgs,
};
use manifest::{digest_all, manifest_path_for, mismatches, sha256_bytes, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "simile", version, about = "Literal-to-simile corpus building, generation and evaluation")]
pub struct Cli {
    /// TOML configuration file with one section per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run manifest path; defaults to `<primary output>.manifest.json`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub simile: SimileSection,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract self-labeled similes (and optionally literal test sentences).
    Harvest(HarvestArgs),
    /// Turn similes into literal/simile training pairs.
    BuildCorpus(CorpusArgs),
    /// Fine-tune a model on training pairs.
    Train(TrainArgs),
    /// Generate similes for literal sentences with one system.
    Generate(GenerateArgs),
    /// Score generated similes against references.
    Evaluate(EvaluateArgs),
    /// Replace one literal sentence per story with a simile.
    Embellish(EmbellishArgs),
    /// Re-run a recorded command and verify its outputs byte for byte.
    Replay {
        /// Run manifest written by an earlier command.
        manifest: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Harvest(#[from] HarvestError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Story(#[from] StoryError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("replay of {command} produced different outputs: {}", .mismatches.join("; "))]
    ReplayMismatch { command: String, mismatches: Vec<String> },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Harvest(_) => "harvest",
            CliError::Corpus(_) => "corpus",
            CliError::Knowledge(_) => "knowledge",
            CliError::Lm(_) => "lm",
            CliError::Generate(_) => "generate",
            CliError::Eval(_) => "eval",
            CliError::Story(_) => "story",
            CliError::Jsonl(_) => "jsonl",
            CliError::Remote(_) => "remote",
            CliError::ReplayMismatch { .. } => "replay_mismatch",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Config(_) => 2,
            CliError::ReplayMismatch { .. } => 3,
            _ => 1,
        }
    }

    /// Structured report printed on stderr.
    pub fn report(&self) -> serde_json::Value {
        let details = match self {
            CliError::Config(problems) => problems.clone(),
            CliError::ReplayMismatch { mismatches, .. } => mismatches.clone(),
            _ => Vec::new(),
        };
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "details": details,
            }
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub outputs: Vec<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub summary: serde_json::Value,
    /// Human-readable output, when the command has one.
    pub display: Option<String>,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv)?;
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();

    let (file, config_path) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let parsed = ConfigFile::parse(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
            (parsed, Some(path.clone()))
        }
        None => (ConfigFile::default(), None),
    };
    let mut simile = cli.simile.clone();
    simile.merge(&file.simile);
    let ctx = Ctx {
        argv,
        config_path,
        manifest: cli.manifest.clone(),
        simile,
    };
    match cli.command {
        Command::Harvest(mut a) => {
            a.merge(&file.harvest);
            ctx.harvest(a)
        }
        Command::BuildCorpus(mut a) => {
            a.merge(&file.corpus);
            ctx.build_corpus(a)
        }
        Command::Train(mut a) => {
            a.merge(&file.train);
            ctx.train(a)
        }
        Command::Generate(mut a) => {
            a.merge(&file.generate);
            ctx.generate(a)
        }
        Command::Evaluate(mut a) => {
            a.merge(&file.evaluate);
            ctx.evaluate(a)
        }
        Command::Embellish(mut a) => {
            a.merge(&file.embellish, &file.generate);
            ctx.embellish(a)
        }
        Command::Replay { manifest } => replay(&manifest),
    }
}

/// Runs the command and prints its result; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match run(argv) {
        Ok(outcome) => {
            match &outcome.display {
                Some(text) => print!("{text}"),
                None => println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default()),
            }
            0
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}

fn replay(path: &Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let recorded: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(vec![format!("{}: not a run manifest: {e}", path.display())]))?;
    if recorded.command == "replay" {
        return Err(CliError::Config(vec!["a replay manifest cannot be replayed".into()]));
    }
    let rerun = run(&recorded.argv)?;
    let bad = mismatches(&recorded.outputs);
    if !bad.is_empty() {
        return Err(CliError::ReplayMismatch {
            command: recorded.command,
            mismatches: bad,
        });
    }
    Ok(Outcome {
        command: "replay".into(),
        summary: json!({
            "replayed": recorded.command,
            "outputs_matched": recorded.outputs.len(),
        }),
        outputs: rerun.outputs,
        manifest: rerun.manifest,
        display: None,
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let f = std::fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if !line.is_empty() {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// A generation system with its loaded backend.
enum Loaded {
    Model(Box<dyn Generator>),
    Knowledge(EdgeTable, SynonymTable, ArticlePolicy),
}

impl Loaded {
    fn backend(&self) -> Backend<'_> {
        match self {
            Loaded::Model(m) => Backend::Model(m.as_ref()),
            Loaded::Knowledge(edges, synonyms, article) => Backend::Knowledge {
                edges,
                synonyms,
                article: *article,
            },
        }
    }
}

struct Ctx {
    argv: Vec<String>,
    config_path: Option<PathBuf>,
    manifest: Option<PathBuf>,
    simile: SimileSection,
}

impl Ctx {
    fn triggers(&self, p: &mut Problems) -> TriggerConfig {
        if self.simile.triggers.is_empty() {
            return TriggerConfig::default();
        }
        TriggerConfig::new(self.simile.triggers.clone(), self.simile.case_sensitive.unwrap_or(false))
            .unwrap_or_else(|e| {
                p.push(format!("[simile].triggers: {e}"));
                TriggerConfig::default()
            })
    }

    fn tagger(&self, p: &mut Problems) -> LexiconTagger {
        let tagger = LexiconTagger::new();
        match &self.simile.lexicon {
            None => tagger,
            Some(path) => tagger.with_lexicon_file(path).unwrap_or_else(|e: TaggerError| {
                p.push(format!("[simile].lexicon: {}: {e}", path.display()));
                LexiconTagger::new()
            }),
        }
    }

    fn bail(p: Problems) -> Result<(), CliError> {
        if p.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(p.0))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        command: &str,
        settings: &impl Serialize,
        seeds: BTreeMap<String, u64>,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
        summary: serde_json::Value,
        display: Option<String>,
    ) -> Result<Outcome, CliError> {
        let settings = json!({ "simile": self.simile, command: settings });
        let config_sha256 = sha256_bytes(&serde_json::to_vec(&settings).expect("settings serialize"));
        let mut input_paths = inputs;
        if let Some(c) = &self.config_path {
            input_paths.insert(0, c.clone());
        }
        if let Some(l) = &self.simile.lexicon {
            input_paths.push(l.clone());
        }
        let m = RunManifest {
            tool: format!("simile {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            argv: self.argv.clone(),
            config_path: self.config_path.clone(),
            config_sha256,
            settings,
            seeds,
            inputs: digest_all(&input_paths).map_err(|e| CliError::Io {
                path: PathBuf::from("<inputs>"),
                source: e,
            })?,
            outputs: digest_all(&outputs).map_err(|e| CliError::Io {
                path: PathBuf::from("<outputs>"),
                source: e,
            })?,
        };
        let path = self
            .manifest
            .clone()
            .unwrap_or_else(|| manifest_path_for(&outputs[0]));
        let body = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
        std::fs::write(&path, body).map_err(io_err(&path))?;
        log::info!("{command}: manifest written to {}", path.display());
        Ok(Outcome {
            command: command.to_string(),
            outputs,
            manifest: Some(path),
            summary,
            display,
        })
    }

    fn harvest(&self, a: HarvestArgs) -> Result<Outcome, CliError> {
        let mut p = Problems::default();
        p.require(&a.input, "[harvest].input", "--in");
        p.require(&a.output, "[harvest].output", "--out");
        p.exists(a.input.as_ref(), "[harvest].input");
        if let Some(r) = a.split_ratio {
            p.check(r > 0.0 && r < 1.0, || format!("[harvest].split_ratio must lie in (0, 1), got {r}"));
            p.require(&a.train_out, "[harvest].train_out", "--train-out");
            p.require(&a.validation_out, "[harvest].validation_out", "--validation-out");
            p.require(&a.seed, "[harvest].seed", "--seed");
        }
        if a.literals.is_some() {
            p.exists(a.literals.as_ref(), "[harvest].literals");
            p.require(&a.literals_out, "[harvest].literals_out", "--literals-out");
            if a.literal_sample.is_some() {
                p.require(&a.seed, "[harvest].seed", "--seed");
            }
        }
        let triggers = self.triggers(&mut p);
        let tagger = self.tagger(&mut p);
        Self::bail(p)?;
        let (input, output) = (a.input.clone().unwrap(), a.output.clone().unwrap());

        let file = std::fs::File::open(&input).map_err(io_err(&input))?;
        let h = harvest::harvest_jsonl(BufReader::new(file), &triggers).map_err(io_err(&input))?;
        let records: Vec<SimileRecord> = h.similes.iter().map(|s| s.to_record()).collect();
        jsonl::write(&output, &records)?;
        let mut outputs = vec![output];
        let mut inputs = vec![input];
        let mut seeds = BTreeMap::new();
        let mut summary = json!({
            "similes": h.similes.len(),
            "malformed": h.malformed,
            "sentences_seen": h.sentences_seen,
            "duplicates": h.duplicates,
        });
        if let Some(ratio) = a.split_ratio {
            let seed = a.seed.unwrap();
            seeds.insert("split".into(), seed);
            let split = harvest::split_corpus(records, ratio, seed)?;
            let (t, v) = (a.train_out.clone().unwrap(), a.validation_out.clone().unwrap());
            jsonl::write(&t, &split.train)?;
            jsonl::write(&v, &split.validation)?;
            summary["train"] = json!(split.train.len());
            summary["validation"] = json!(split.validation.len());
            outputs.extend([t, v]);
        }
        if let Some(lit) = &a.literals {
            let sentences = read_lines(lit)?;
            let lh = harvest::harvest_literals(&sentences, &tagger);
            let mut kept: Vec<_> = lh.kept.iter().map(|l| l.to_record()).collect();
            if let Some(n) = a.literal_sample {
                let seed = a.seed.unwrap();
                seeds.insert("literal_sample".into(), seed);
                kept = harvest::sample(&kept, n, seed);
            }
            let out = a.literals_out.clone().unwrap();
            jsonl::write(&out, &kept)?;
            summary["literals_kept"] = json!(kept.len());
            summary["literals_rejected_comparator"] = json!(lh.rejected_comparator);
            summary["literals_rejected_not_modifier"] = json!(lh.rejected_not_modifier);
            inputs.push(lit.clone());
            outputs.push(out);
        }
        self.finish("harvest", &a, seeds, inputs, outputs, summary, None)
    }

    fn build_corpus(&self, a: CorpusArgs) -> Result<Outcome, CliError> {
        let mut p = Problems::default();
        p.require(&a.input, "[corpus].input", "--in");
        p.require(&a.output, "[corpus].output", "--out");
        p.exists(a.input.as_ref(), "[corpus].input");
        match (&a.knowledge, &a.knowledge_command) {
            (None, None) => p.push("missing key [corpus].knowledge (or --knowledge) or [corpus].knowledge_command".into()),
            (Some(_), Some(_)) => p.push("[corpus].knowledge and [corpus].knowledge_command are exclusive".into()),
            _ => p.exists(a.knowledge.as_ref(), "[corpus].knowledge"),
        }
        let scorer = a.scorer.clone().unwrap_or_else(|| "reference".into());
        let corrector = a.corrector.clone().unwrap_or_else(|| "identity".into());
        p.check(matches!(scorer.as_str(), "reference" | "uniform" | "remote"), || {
            format!("[corpus].scorer must be reference, uniform or remote, got {scorer:?}")
        });
        let needs_backend = scorer == "remote" || corrector == "remote";
        if needs_backend {
            p.require(&a.backend_command, "[corpus].backend_command", "--backend-command");
        }
        if !matches!(corrector.as_str(), "identity" | "remote") {
            p.exists(Some(&PathBuf::from(&corrector)), "[corpus].corrector");
        }
        p.exists(a.scorer_text.as_ref(), "[corpus].scorer_text");
        let k = a.k.unwrap_or(5);
        p.check(k >= 1, || "[corpus].k must be at least 1".into());
        let triggers = self.triggers(&mut p);
        Self::bail(p)?;
        let (input, output) = (a.input.clone().unwrap(), a.output.clone().unwrap());
        let mut inputs = vec![input.clone()];

        let records: Vec<SimileRecord> = jsonl::read(&input)?;
        let mut unparsed = Vec::new();
        let mut similes = Vec::with_capacity(records.len());
        for r in &records {
            match r.to_instance(&triggers) {
                Some(s) => similes.push(s),
                None => unparsed.push(r.source_id.clone()),
            }
        }
        let knowledge: Box<dyn PropertyBackend> = match (&a.knowledge, &a.knowledge_command) {
            (Some(path), _) => {
                inputs.push(path.clone());
                Box::new(load_edge_table(path)?)
            }
            (None, Some(cmd)) => Box::new(RemoteKnowledge::spawn(cmd)?),
            (None, None) => unreachable!("validated"),
        };
        let backend = match (&a.backend_command, needs_backend) {
            (Some(cmd), true) => Some(RemoteLm::spawn(cmd)?),
            _ => None,
        };
        let scorer: Box<dyn Scorer> = match scorer.as_str() {
            "reference" => {
                let text = match &a.scorer_text {
                    Some(path) => {
                        inputs.push(path.clone());
                        read_lines(path)?
                    }
                    None => records.iter().map(|r| r.text.clone()).collect(),
                };
                Box::new(BigramScorer::train(&text))
            }
            "uniform" => Box::new(UniformScorer::new(1)),
            _ => Box::new(backend.clone().expect("validated")),
        };
        let corrector: Box<dyn GrammarCorrector> = match corrector.as_str() {
            "identity" => Box::new(IdentityCorrector),
            "remote" => Box::new(backend.clone().expect("validated")),
            path => {
                inputs.push(PathBuf::from(path));
                Box::new(ReplacementCorrector::load(Path::new(path))?)
            }
        };
        let opts = CorpusOptions {
            k,
            policy: CandidatePolicy {
                drop_comma_before_comparator: a.drop_comma.unwrap_or(false),
            },
            triggers,
        };
        let built = build_parallel_corpus(&similes, knowledge.as_ref(), scorer.as_ref(), corrector.as_ref(), &opts);
        corpus::write_pairs_tsv(&output, &built.pairs)?;

        let audit_path = a.audit.clone().unwrap_or_else(|| sibling(&output, ".audit.jsonl"));
        let mut audit: Vec<serde_json::Value> = Vec::new();
        audit.extend(built.pairs.iter().map(|p| json!({"kind": "pair", "pair": p})));
        audit.extend(
            built
                .warnings
                .iter()
                .map(|w| json!({"kind": "warning", "source_id": w.source_id, "message": w.message})),
        );
        audit.extend(
            built
                .failures
                .iter()
                .map(|f| json!({"kind": "failure", "source_id": f.source_id, "message": f.message})),
        );
        audit.extend(
            unparsed
                .iter()
                .map(|id| json!({"kind": "failure", "source_id": id, "message": "record has no trigger phrase"})),
        );
        let summary = json!({
            "similes": records.len(),
            "pairs": built.pairs.len(),
            "skipped_no_properties": built.skipped_no_properties,
            "failures": built.failures.len() + unparsed.len(),
            "warnings": built.warnings.len(),
        });
        audit.push(json!({"kind": "summary", "summary": summary}));
        jsonl::write(&audit_path, &audit)?;
        let seeds = a.seed.map(|s| ("corpus".to_string(), s)).into_iter().collect();
        self.finish("build-corpus", &a, seeds, inputs, vec![output, audit_path], summary, None)
    }

    fn train(&self, a: TrainArgs) -> Result<Outcome, CliError> {
        let mut p = Problems::default();
        p.require(&a.pairs, "[train].pairs", "--pairs");
        p.require(&a.model_dir, "[train].model_dir", "--model-dir");
        p.require(&a.seed, "[train].seed", "--seed");
        p.exists(a.pairs.as_ref(), "[train].pairs");
        p.exists(a.text.as_ref(), "[train].text");
        let kind = a.kind.clone().unwrap_or_else(|| "template".into());
        p.check(matches!(kind.as_str(), "template" | "bigram" | "remote"), || {
            format!("[train].kind must be template, bigram or remote, got {kind:?}")
        });
        if kind == "remote" {
            p.require(&a.backend_command, "[train].backend_command", "--backend-command");
        }
        let mask = a.metaphor_mask.unwrap_or(false);
        p.check(!(mask && kind == "bigram"), || "[train].metaphor_mask needs kind template or remote".into());
        let cfg = TrainConfig {
            epochs: a.epochs.unwrap_or(17),
            batch_token_budget: a.batch_token_budget.unwrap_or(1024),
            seed: a.seed.unwrap_or(0),
        };
        if let Err(e) = cfg.validate() {
            p.push(format!("[train]: {e}"));
        }
        let tagger = self.tagger(&mut p);
        Self::bail(p)?;
        let (pairs_path, dir) = (a.pairs.clone().unwrap(), a.model_dir.clone().unwrap());
        let pairs = corpus::read_pairs_tsv(&pairs_path)?;
        let mut inputs = vec![pairs_path];
        let mut summary = json!({ "pairs": pairs.len(), "kind": kind, "metaphor_mask": mask });
        match kind.as_str() {
            "template" => {
                let model = if mask {
                    let t = generate::train_metaphor_mask(&pairs, &cfg, &TemplateTrainer, &tagger)?;
                    summary["skipped_unmaskable"] = json!(t.skipped);
                    t.model
                } else {
                    lm::fine_tune(&pairs, &cfg, &TemplateTrainer)?
                };
                ReferenceModel::Template(model).save(&dir)?;
            }
            "bigram" => {
                let text = match &a.text {
                    Some(path) => {
                        inputs.push(path.clone());
                        read_lines(path)?
                    }
                    None => pairs.iter().map(|p| p.target.clone()).collect(),
                };
                if text.is_empty() {
                    return Err(LmError::EmptyTrainingSet.into());
                }
                ReferenceModel::Bigram(BigramScorer::train(&text)).save(&dir)?;
            }
            _ => {
                let trainer = RemoteTrainer {
                    backend: RemoteLm::spawn(a.backend_command.as_deref().unwrap())?,
                    output_dir: dir.clone(),
                };
                if mask {
                    let t = generate::train_metaphor_mask(&pairs, &cfg, &trainer, &tagger)?;
                    summary["skipped_unmaskable"] = json!(t.skipped);
                } else {
                    lm::fine_tune(&pairs, &cfg, &trainer)?;
                }
                std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            }
        }
        let seeds = BTreeMap::from([("train".to_string(), cfg.seed)]);
        self.finish("train", &a, seeds, inputs, vec![dir], summary, None)
    }

    /// Validates system settings; `seed` is the command's seed.
    fn resolve_system(
        s: &SystemArgs,
        section: &str,
        seed: Option<u64>,
        p: &mut Problems,
    ) -> Option<(SystemKind, GenerationConfig, ArticlePolicy)> {
        let kind = p
            .require(&s.system, &format!("[{section}].system"), "--system")
            .and_then(|name| match name.parse::<SystemKind>() {
                Ok(k) => Some(k),
                Err(e) => {
                    p.push(format!("[{section}].system: {e}"));
                    None
                }
            });
        let article = match s.article.as_deref() {
            None | Some("fixed") => ArticlePolicy::Fixed,
            Some("vowel") => ArticlePolicy::Vowel,
            Some(other) => {
                p.push(format!("[{section}].article must be fixed or vowel, got {other:?}"));
                ArticlePolicy::Fixed
            }
        };
        match kind {
            Some(SystemKind::Rtrvl) => {
                p.require(&s.knowledge, &format!("[{section}].knowledge"), "--knowledge");
                p.exists(s.knowledge.as_ref(), &format!("[{section}].knowledge"));
                p.exists(s.synonyms.as_ref(), &format!("[{section}].synonyms"));
            }
            Some(_) if s.backend_command.is_none() => {
                p.require(&s.model_dir, &format!("[{section}].model_dir"), "--model-dir");
                p.exists(s.model_dir.as_ref(), &format!("[{section}].model_dir"));
            }
            _ => {}
        }
        let defaults = GenerationConfig::default();
        let cfg = GenerationConfig {
            top_k: s.top_k.unwrap_or(defaults.top_k),
            temperature: s.temperature.unwrap_or(defaults.temperature),
            max_new_tokens: s.max_new_tokens.unwrap_or(defaults.max_new_tokens),
            seed: seed.unwrap_or(0),
            forced_prefix: None,
        };
        if let Err(e) = cfg.validate() {
            p.push(format!("[{section}]: {e}"));
        }
        kind.map(|k| (k, cfg, article))
    }

    fn load_system(kind: SystemKind, s: &SystemArgs, article: ArticlePolicy, inputs: &mut Vec<PathBuf>) -> Result<Loaded, CliError> {
        if kind == SystemKind::Rtrvl {
            let path = s.knowledge.clone().expect("validated");
            let edges = load_edge_table(&path)?;
            inputs.push(path);
            let synonyms = match &s.synonyms {
                Some(path) => {
                    inputs.push(path.clone());
                    SynonymTable::load(path)?
                }
                None => SynonymTable::default(),
            };
            return Ok(Loaded::Knowledge(edges, synonyms, article));
        }
        Ok(Loaded::Model(match &s.backend_command {
            Some(cmd) => {
                let lm = RemoteLm::spawn(cmd)?;
                Box::new(match &s.model_dir {
                    Some(dir) => lm.with_model(dir.display().to_string()),
                    None => lm,
                })
            }
            None => {
                let dir = s.model_dir.clone().expect("validated");
                let model = ReferenceModel::load(&dir)?;
                inputs.push(dir);
                Box::new(model)
            }
        }))
    }

    fn generate(&self, a: GenerateArgs) -> Result<Outcome, CliError> {
        let mut p = Problems::default();
        p.require(&a.input, "[generate].input", "--in");
        p.require(&a.output, "[generate].output", "--out");
        p.require(&a.seed, "[generate].seed", "--seed");
        p.exists(a.input.as_ref(), "[generate].input");
        let system = Self::resolve_system(&a.system, "generate", a.seed, &mut p);
        let tagger = self.tagger(&mut p);
        Self::bail(p)?;
        let (kind, cfg, article) = system.expect("validated");
        let (input, output) = (a.input.clone().unwrap(), a.output.clone().unwrap());
        let literals = read_lines(&input)?;
        let mut inputs = vec![input];
        let loaded = Self::load_system(kind, &a.system, article, &mut inputs)?;
        let sys = SimileSystem::new(kind, loaded.backend(), &tagger, cfg.clone());
        let batch = sys.run_batch(&literals);
        for (lit, msg) in &batch.failures {
            log::warn!("{lit:?}: {msg}");
        }
        jsonl::write(&output, &batch.records)?;
        let summary = json!({
            "system": kind,
            "literals": literals.len(),
            "records": batch.records.len(),
            "blank": batch.records.iter().filter(|r| r.blank).count(),
            "truncated": batch.records.iter().filter(|r| r.truncated).count(),
            "failures": batch.failures.iter().map(|(l, m)| json!({"literal": l, "message": m})).collect::<Vec<_>>(),
        });
        let seeds = BTreeMap::from([("generate".to_string(), cfg.seed)]);
        self.finish("generate", &a, seeds, inputs, vec![output], summary, None)
    }

    fn evaluate(&self, a: EvaluateArgs) -> Result<Outcome, CliError> {
        let mut p = Problems::default();
        p.check(!a.generated.is_empty(), || "missing key [evaluate].generated (or --generated)".into());
        for g in &a.generated {
            p.exists(Some(g), "[evaluate].generated");
        }
        p.require(&a.refs, "[evaluate].refs", "--refs");
        p.require(&a.output, "[evaluate].output", "--out");
        p.exists(a.refs.as_ref(), "[evaluate].refs");
        p.exists(a.training_pairs.as_ref(), "[evaluate].training_pairs");
        p.exists(a.scores.as_ref(), "[evaluate].scores");
        let mut systems = Vec::new();
        for s in &a.systems {
            match s.parse::<SystemKind>() {
                Ok(k) => systems.push(k),
                Err(e) => p.push(format!("[evaluate].systems: {e}")),
            }
        }
        let smoothing = match a.smoothing.as_deref() {
            None | Some("none") => Smoothing::None,
            Some("add_one") => Smoothing::AddOne,
            Some(other) => {
                p.push(format!("[evaluate].smoothing must be none or add_one, got {other:?}"));
                Smoothing::None
            }
        };
        let embedder_name = a.embedder.clone().unwrap_or_else(|| "char".into());
        if !matches!(embedder_name.as_str(), "char" | "onehot") {
            p.exists(Some(&PathBuf::from(&embedder_name)), "[evaluate].embedder");
        }
        let triggers = self.triggers(&mut p);
        let tagger = self.tagger(&mut p);
        Self::bail(p)?;
        let (refs_path, output) = (a.refs.clone().unwrap(), a.output.clone().unwrap());
        let mut inputs = a.generated.clone();
        inputs.push(refs_path.clone());

        let embedder: Box<dyn Embedder> = match embedder_name.as_str() {
            "char" => Box::new(CharNgramEmbedder::default()),
            "onehot" => Box::new(OneHotEmbedder),
            path => {
                inputs.push(PathBuf::from(path));
                Box::new(TableEmbedder::load(Path::new(path))?)
            }
        };
        let gold: BTreeMap<String, Vec<String>> = jsonl::read::<GoldItem>(&refs_path)?
            .into_iter()
            .map(|g| (g.literal, g.references))
            .collect();
        let training: Vec<(String, String)> = match &a.training_pairs {
            Some(path) => {
                inputs.push(path.clone());
                corpus::read_pairs_tsv(path)?
                    .iter()
                    .filter_map(|pair| {
                        let prop = strip_terminal_modifier(&pair.source, &tagger).ok()?.property;
                        let vehicle = parse_simile(&pair.target, &triggers)?.vehicle_phrase().to_string();
                        Some((prop, vehicle))
                    })
                    .collect()
            }
            None => Vec::new(),
        };
        let mut by_system: BTreeMap<SystemKind, Vec<GenerationRecord>> = BTreeMap::new();
        for path in &a.generated {
            for r in jsonl::read::<GenerationRecord>(path)? {
                by_system.entry(r.system).or_default().push(r);
            }
        }
        if systems.is_empty() {
            systems = by_system.keys().copied().collect();
        }
        let mut report = MetricReport::default();
        for kind in &systems {
            let records = by_system.get(kind).map(Vec::as_slice).unwrap_or_default();
            let mut m = evaluate_system(&SystemInputs {
                records,
                gold: &gold,
                training: &training,
                embedder: embedder.as_ref(),
                tagger: &tagger,
                triggers: &triggers,
                smoothing,
            })?;
            if a.training_pairs.is_none() {
                m.novelty = None;
            }
            report.systems.push(m);
        }
        let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        std::fs::write(&output, body).map_err(io_err(&output))?;
        let mut table = report.to_table();
        let mut outputs = vec![output.clone()];
        if let Some(sheet_path) = &a.scores {
            inputs.push(sheet_path.clone());
            let sheet = ScoreSheet::load(sheet_path)?;
            let human = human_summary(&sheet, &systems, a.baseline_against.as_deref())?;
            let path = sibling(&output, ".human.json");
            let body = serde_json::to_string_pretty(&human).expect("json") + "\n";
            std::fs::write(&path, body).map_err(io_err(&path))?;
            table.push_str(&human_table(&sheet));
            outputs.push(path);
        }
        if let Some(t) = &a.table {
            std::fs::write(t, &table).map_err(io_err(t))?;
            outputs.push(t.clone());
        }
        let summary = serde_json::to_value(&report).expect("report serializes");
        self.finish("evaluate", &a, BTreeMap::new(), inputs, outputs, summary, Some(table))
    }

    fn embellish(&self, a: EmbellishArgs) -> Result<Outcome, CliError> {
        let mut p = Problems::default();
        p.require(&a.stories, "[embellish].stories", "--stories");
        p.require(&a.output, "[embellish].output", "--out");
        p.require(&a.seed, "[embellish].seed", "--seed");
        p.exists(a.stories.as_ref(), "[embellish].stories");
        let system = Self::resolve_system(&a.system, "embellish", a.seed, &mut p);
        let tagger = self.tagger(&mut p);
        Self::bail(p)?;
        let (kind, cfg, article) = system.expect("validated");
        let (stories_path, output) = (a.stories.clone().unwrap(), a.output.clone().unwrap());
        let stories = story::read_stories(&stories_path)?;
        let mut inputs = vec![stories_path];
        let loaded = Self::load_system(kind, &a.system, article, &mut inputs)?;
        let sys = SimileSystem::new(kind, loaded.backend(), &tagger, cfg.clone());
        let out = story::embellish_batch(&stories, &sys, &tagger, cfg.seed);
        story::write_embellished(&output, &out)?;
        let summary = json!({
            "system": kind,
            "stories": out.len(),
            "replaced": out.iter().filter(|s| s.replaced_index.is_some()).count(),
            "warnings": out.iter().filter(|s| s.warning.is_some()).count(),
        });
        let seeds = BTreeMap::from([("embellish".to_string(), cfg.seed)]);
        self.finish("embellish", &a, seeds, inputs, vec![output], summary, None)
    }
}

fn human_summary(sheet: &ScoreSheet, systems: &[SystemKind], against: Option<&str>) -> Result<serde_json::Value, EvalError> {
    let means: Vec<serde_json::Value> = mean_scores(sheet)
        .into_iter()
        .map(|((system, criterion), mean)| json!({"system": system, "criterion": criterion, "mean": mean}))
        .collect();
    let alpha: BTreeMap<String, Option<f64>> = Criterion::ALL
        .iter()
        .map(|c| (c.to_string(), sheet_alpha(sheet, *c)))
        .collect();
    let mut pairwise = Vec::new();
    if let Some(base) = against {
        for other in systems.iter().map(|s| s.as_str()).filter(|s| *s != base) {
            for c in Criterion::ALL {
                match pairwise_compare(sheet, base, other, c) {
                    Ok(r) => pairwise.push(json!({"system": base, "against": other, "criterion": c, "result": r})),
                    Err(EvalError::NoRatings { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(json!({"means": means, "alpha": alpha, "pairwise": pairwise}))
}

fn human_table(sheet: &ScoreSheet) -> String {
    use std::fmt::Write as _;
    let means = mean_scores(sheet);
    let systems: std::collections::BTreeSet<&String> = means.keys().map(|(s, _)| s).collect();
    let mut out = format!("\n{:<8} {:>5} {:>5} {:>5} {:>5}\n", "Model", "C", "R1", "R2", "OQ");
    for s in systems {
        let _ = write!(out, "{:<8}", s.to_uppercase());
        for c in Criterion::ALL {
            match means.get(&(s.clone(), c)) {
                Some(m) => {
                    let _ = write!(out, " {m:>5.2}");
                }
                None => out.push_str("     -"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_keys_are_reported_together() {
        let err = run(["simile", "generate"]).unwrap_err();
        match &err {
            CliError::Config(problems) => {
                let joined = problems.join("\n");
                for key in ["[generate].input", "[generate].output", "[generate].seed", "[generate].system"] {
                    assert!(joined.contains(key), "{joined}");
                }
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.report()["error"]["kind"], "config");
    }

    #[test]
    fn usage_errors_pass_through() {
        assert!(matches!(run(["simile", "frobnicate"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn bad_values_are_named() {
        let err = run(["simile", "generate", "--system", "gpt", "--top-k", "0", "--seed", "1"]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("gpt") && text.contains("top_k"), "{text}");
    }
}
