//! Acceptance checks. Runs as a plain binary (`harness = false`) so every
//! criterion prints one PASS/FAIL line, in order, with its timing.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simile_kit::cli;
use simile_kit::corpus::{build_parallel_corpus, CorpusOptions, ReplacementCorrector};
use simile_kit::eval::{
    embedding_f1, novelty, pairwise_compare, vehicle_bleu, CharNgramEmbedder, Criterion, OneHotEmbedder, ScoreSheet,
    TableEmbedder,
};
use simile_kit::generate::{
    baseline_retrieval, forced_prefix_for, ArticlePolicy, Backend, GenerationRecord, SimileSystem, SystemKind,
};
use simile_kit::harvest::{harvest_literals, split_corpus};
use simile_kit::knowledge::{EdgeTable, KnowledgeEdge, KnowledgeError, PropertyBackend, PropertyCandidate, SynonymTable};
use simile_kit::lm::{GenerationConfig, LmError, Scorer};
use simile_kit::simile::{parse_simile, strip_terminal_modifier, TriggerConfig};
use simile_kit::story::{embellish, embellish_batch, Story};
use simile_kit::tagger::LexiconTagger;

enum Verdict {
    Pass(String),
    /// Fails against the stated target; the shortfall is understood and
    /// does not fail the suite.
    KnownFail(String),
}

type Check = Result<Verdict, String>;
type NamedCheck = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

struct ListBackend(Vec<(&'static str, Vec<&'static str>)>);

impl PropertyBackend for ListBackend {
    fn properties(&self, concept: &str, k: usize) -> Result<Vec<PropertyCandidate>, KnowledgeError> {
        let list = self
            .0
            .iter()
            .find(|(c, _)| concept.trim_end_matches('.') == *c)
            .map(|(_, l)| l.clone())
            .unwrap_or_default();
        Ok(list
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, p)| PropertyCandidate {
                text: p.to_string(),
                score: (list.len() - i) as f64,
            })
            .collect())
    }
}

/// Perplexity 1 for the listed texts, 50 for everything else.
struct Prefer(Vec<&'static str>);

impl Scorer for Prefer {
    fn perplexity(&self, text: &str) -> Result<f64, LmError> {
        Ok(if self.0.contains(&text) { 1.0 } else { 50.0 })
    }
}

fn table_two() -> Check {
    let started = Instant::now();
    let cfg = TriggerConfig::default();
    let similes: Vec<_> = [
        "Love is like a unicorn.",
        "It was cool and quiet, and I stormed through like a charging bull.",
        "Sir Francis's voice was calm and quiet, like a breeze through a forest.",
    ]
    .iter()
    .map(|s| parse_simile(s, &cfg).ok_or_else(|| format!("did not parse {s:?}")))
    .collect::<Result<_, _>>()?;
    let knowledge = ListBackend(vec![
        ("unicorn", vec!["very rare", "rare", "beautiful", "beautiful and smart", "color"]),
        ("charging bull", vec!["big and strong", "dangerous", "big", "fast", "large"]),
        ("breeze through a forest", vec!["very relax", "soothe", "cool", "beautiful", "relax"]),
    ]);
    let scorer = Prefer(vec![
        "Love is rare.",
        "It was cool and quiet, and I stormed through fast.",
        "Sir Francis's voice was calm and quiet, very relax.",
    ]);
    let corrector = ReplacementCorrector::new([("relax", "relaxed")]);
    let build = build_parallel_corpus(&similes, &knowledge, &scorer, &corrector, &CorpusOptions::default());
    let elapsed = started.elapsed();
    let got: Vec<&str> = build.pairs.iter().map(|p| p.source.as_str()).collect();
    let want = [
        "Love is rare.",
        "It was cool and quiet, and I stormed through fast.",
        "Sir Francis's voice was calm and quiet, very relaxed.",
    ];
    ensure(got == want, || format!("sources {got:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(Verdict::Pass(format!("3/3 sources exact, {elapsed:?}")))
}

// ---------------------------------------------------------------- 2

fn retrieval() -> Check {
    let edges = EdgeTable::from_edges([
        KnowledgeEdge {
            concept: "sunset".into(),
            property: "beautiful".into(),
            weight: 9.0,
        },
        KnowledgeEdge {
            concept: "flower".into(),
            property: "beautiful".into(),
            weight: 4.0,
        },
        KnowledgeEdge {
            concept: "ice".into(),
            property: "cold".into(),
            weight: 9.5,
        },
    ]);
    let got = baseline_retrieval(
        "The city was beautiful",
        &edges,
        &SynonymTable::default(),
        &LexiconTagger::new(),
        ArticlePolicy::Fixed,
    )
    .map_err(|e| e.to_string())?;
    ensure(got.as_deref() == Some("The city was like a sunset"), || format!("got {got:?}"))?;
    Ok(Verdict::Pass("\"The city was like a sunset\"".into()))
}

// ---------------------------------------------------------------- 3

/// Straight from the definition: clipped n-gram precision via linear scans,
/// geometric mean, brevity penalty against the closest reference length.
fn oracle_bleu(cands: &[Vec<String>], refs: &[Vec<Vec<String>>], n: usize) -> f64 {
    fn grams(t: &[String], k: usize) -> Vec<&[String]> {
        (0..t.len().saturating_sub(k - 1)).map(|i| &t[i..i + k]).collect()
    }
    let mut c_len = 0;
    let mut r_len = 0;
    let mut num = vec![0usize; n];
    let mut den = vec![0usize; n];
    for (c, rs) in cands.iter().zip(refs) {
        c_len += c.len();
        let mut best = usize::MAX;
        for r in rs {
            let d = (r.len() as i64 - c.len() as i64).unsigned_abs() as usize;
            let bd = (best as i64 - c.len() as i64).unsigned_abs() as usize;
            if best == usize::MAX || d < bd || (d == bd && r.len() < best) {
                best = r.len();
            }
        }
        r_len += if best == usize::MAX { 0 } else { best };
        for k in 1..=n {
            let cg = grams(c, k);
            let mut seen: Vec<&[String]> = Vec::new();
            for g in &cg {
                if seen.contains(g) {
                    continue;
                }
                seen.push(g);
                let count = cg.iter().filter(|h| *h == g).count();
                let max_ref = rs
                    .iter()
                    .map(|r| grams(r, k).iter().filter(|h| *h == g).count())
                    .max()
                    .unwrap_or(0);
                num[k - 1] += count.min(max_ref);
            }
            den[k - 1] += cg.len();
        }
    }
    if c_len == 0 || (0..n).any(|k| num[k] == 0 || den[k] == 0) {
        return 0.0;
    }
    let mut p = 1.0f64;
    for k in 0..n {
        p *= num[k] as f64 / den[k] as f64;
    }
    let bp = if c_len > r_len {
        1.0
    } else {
        (1.0 - r_len as f64 / c_len as f64).exp()
    };
    bp * p.powf(1.0 / n as f64)
}

fn random_tokens(rng: &mut ChaCha8Rng, max: usize) -> Vec<String> {
    const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f"];
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string()).collect()
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut nonzero = 0;
    for _ in 0..100 {
        let items = rng.gen_range(1..=6);
        let cands: Vec<Vec<String>> = (0..items).map(|_| random_tokens(&mut rng, 5)).collect();
        let refs: Vec<Vec<Vec<String>>> = (0..items)
            .map(|_| (0..rng.gen_range(1..=3)).map(|_| random_tokens(&mut rng, 5)).collect())
            .collect();
        for n in [1, 2] {
            let got = vehicle_bleu(&cands, &refs, n).map_err(|e| e.to_string())?;
            let want = oracle_bleu(&cands, &refs, n);
            if want > 0.0 {
                nonzero += 1;
            }
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |bleu - oracle| = {worst:e}"))?;
    ensure(nonzero > 50, || format!("only {nonzero} non-zero oracle values"))?;

    let refs = ["sandy death trap", "wasteland"];
    let tok = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let desert = vehicle_bleu(&[tok("desert")], &[refs.iter().map(|r| tok(r)).collect()], 1)
        .map_err(|e| e.to_string())?;
    ensure(desert == 0.0, || format!("desert BLEU-1 {desert}"))?;
    let overlap = embedding_f1("desert", &refs, &OneHotEmbedder);
    ensure(overlap == 0.0, || format!("one-hot F1 {overlap}"))?;
    let char_f1 = embedding_f1("desert", &refs, &CharNgramEmbedder::default());
    let table = TableEmbedder::parse("desert 0.9 0.1 0.2\nwasteland 0.8 0.2 0.1\nsandy 0.7 0.3 0.4\n")
        .map_err(|e| e.to_string())?;
    let table_f1 = embedding_f1("desert", &refs, &table);
    ensure(char_f1 > overlap && table_f1 > overlap, || {
        format!("embedding F1 char {char_f1}, table {table_f1}")
    })?;
    Ok(Verdict::Pass(format!(
        "200 BLEU values, max err {worst:.1e}; desert BLEU 0, F1 char {char_f1:.3} / table {table_f1:.3} > 0"
    )))
}

// ---------------------------------------------------------------- 4

fn novelty_oracle() -> Check {
    const PROPS: &[&str] = &["cold", "Cold ", "fast", "dark", "quiet"];
    const VEHICLES: &[&str] = &["ice", "cheetah", " Cave", "mouse", "owl"];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pick = |n: usize| -> Vec<(String, String)> {
        (0..n)
            .map(|_| {
                (
                    PROPS[rng.gen_range(0..PROPS.len())].to_string(),
                    VEHICLES[rng.gen_range(0..VEHICLES.len())].to_string(),
                )
            })
            .collect()
    };
    for case in 0..1000 {
        let generated = pick(1 + case % 12);
        let training = pick(case % 9);
        let key = |(p, v): &(String, String)| (p.trim().to_lowercase(), v.trim().to_lowercase());
        let unseen = generated
            .iter()
            .filter(|g| !training.iter().any(|t| key(t) == key(g)))
            .count();
        let want = unseen as f64 / generated.len() as f64;
        let got = novelty(&generated, &training).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("case {case}: {got} != {want}"))?;
    }
    let g = [("cold", "ice")];
    let all_seen = novelty(&g, &[("COLD", "ice ")]).map_err(|e| e.to_string())?;
    let none_seen = novelty(&g, &[("cold", "snow")]).map_err(|e| e.to_string())?;
    ensure(all_seen == 0.0 && none_seen == 1.0, || format!("boundaries {all_seen} {none_seen}"))?;
    ensure(novelty::<&str>(&[], &[]).is_err(), || "empty generated set accepted".into())?;
    Ok(Verdict::Pass("1000 random sets exact; boundaries 0 and 1".into()))
}

// ---------------------------------------------------------------- 5

/// Three raters per item; `a` and `b` give the per-rater scores of each system.
fn sheet_from(items: &[([u8; 3], [u8; 3])]) -> ScoreSheet {
    let mut sheet = ScoreSheet::default();
    for (i, (a, b)) in items.iter().enumerate() {
        for r in 0..3 {
            let id = format!("i{i}");
            sheet.push(&id, "A", &format!("r{r}"), Criterion::OQ, a[r]);
            sheet.push(&id, "B", &format!("r{r}"), Criterion::OQ, b[r]);
        }
    }
    sheet
}

fn pairwise() -> Check {
    // means 4 vs 11/3, 3 vs 3, 2 vs 7/3: one of each, twice over
    let small = sheet_from(&[
        ([4, 4, 4], [4, 4, 3]),
        ([3, 3, 3], [5, 1, 3]),
        ([2, 2, 2], [3, 2, 2]),
        ([5, 4, 3], [4, 4, 3]),
        ([1, 2, 3], [2, 2, 2]),
        ([1, 1, 2], [1, 2, 2]),
    ]);
    let p = pairwise_compare(&small, "A", "B", Criterion::OQ).map_err(|e| e.to_string())?;
    let third = 100.0 / 3.0;
    ensure(p.win == third && p.lose == third && p.tie == third, || format!("small sheet {p:?}"))?;

    let mut rows = Vec::new();
    rows.extend(std::iter::repeat_n(([4, 4, 3], [3, 4, 3]), 343));
    rows.extend(std::iter::repeat_n(([2, 3, 3], [3, 3, 3]), 93));
    rows.extend(std::iter::repeat_n(([5, 1, 3], [3, 3, 3]), 64));
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    let p = pairwise_compare(&sheet_from(&rows), "A", "B", Criterion::OQ).map_err(|e| e.to_string())?;
    ensure(
        (p.win - 68.6).abs() < 1e-9 && (p.lose - 18.6).abs() < 1e-9 && (p.tie - 12.8).abs() < 1e-9,
        || format!("500-item sheet {p:?}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let n = rng.gen_range(1..=30);
        let rows: Vec<([u8; 3], [u8; 3])> = (0..n)
            .map(|_| {
                let mut s = || [rng.gen_range(1..=5), rng.gen_range(1..=5), rng.gen_range(1..=5)];
                (s(), s())
            })
            .collect();
        let sheet = sheet_from(&rows);
        let ab = pairwise_compare(&sheet, "A", "B", Criterion::OQ).map_err(|e| e.to_string())?;
        let ba = pairwise_compare(&sheet, "B", "A", Criterion::OQ).map_err(|e| e.to_string())?;
        ensure(ab.win == ba.lose && ab.lose == ba.win && ab.tie == ba.tie, || {
            format!("case {case}: {ab:?} vs {ba:?}")
        })?;
        ensure((ab.win + ab.lose + ab.tie - 100.0).abs() < 1e-9, || format!("case {case}: sum {ab:?}"))?;
    }
    Ok(Verdict::Pass("33.3/33.3/33.3 and 68.6/18.6/12.8 exact; 100 random sheets antisymmetric".into()))
}

// ---------------------------------------------------------------- 6

fn run(args: &[&str]) -> Result<cli::Outcome, String> {
    let argv = std::iter::once("simile").chain(args.iter().copied());
    cli::run(argv).map_err(|e| format!("simile {}: {e}", args.join(" ")))
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn read_records(path: &Path) -> Result<Vec<GenerationRecord>, String> {
    std::fs::read_to_string(path)
        .map_err(|e| e.to_string())?
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn end_to_end() -> Check {
    let started = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let comments = common::write(dir, "comments.jsonl", &common::comments_jsonl());
    let edges = common::write(dir, "edges.tsv", &common::edges_tsv());
    let literals = common::held_out_literals();
    let lit_path = common::write(dir, "literals.txt", &(literals.join("\n") + "\n"));
    let similes = dir.join("similes.jsonl");
    let pairs = dir.join("pairs.tsv");
    let scope_dir = dir.join("scope_model");
    let lm_dir = dir.join("lm_model");
    let scope_out = dir.join("scope.jsonl");
    let bart_out = dir.join("bart.jsonl");

    let steps: Vec<Vec<&str>> = vec![
        vec!["harvest", "--in", p(&comments), "--out", p(&similes)],
        vec![
            "build-corpus", "--in", p(&similes), "--knowledge", p(&edges), "--scorer", "reference", "--out", p(&pairs),
        ],
        vec!["train", "--pairs", p(&pairs), "--model-dir", p(&scope_dir), "--seed", "11"],
        vec!["generate", "--system", "scope", "--model-dir", p(&scope_dir), "--in", p(&lit_path), "--out", p(&scope_out), "--seed", "12"],
        vec!["train", "--pairs", p(&pairs), "--model-dir", p(&lm_dir), "--kind", "bigram", "--seed", "13"],
        vec!["generate", "--system", "bart", "--model-dir", p(&lm_dir), "--in", p(&lit_path), "--out", p(&bart_out), "--seed", "14"],
    ];
    let mut manifests = Vec::new();
    for step in &steps {
        let out = run(step)?;
        manifests.push(out.manifest.ok_or_else(|| format!("{} wrote no manifest", step[0]))?);
    }
    let pair_count = std::fs::read_to_string(&pairs).map_err(|e| e.to_string())?.lines().count();
    ensure(pair_count == 200, || format!("{pair_count} pairs from 200 similes"))?;

    let scope = read_records(&scope_out)?;
    ensure(scope.len() == literals.len(), || format!("{} scope records", scope.len()))?;
    let with_like = scope.iter().filter(|r| r.output.contains("like a")).count();
    let like_rate = with_like as f64 / scope.len() as f64;
    ensure(like_rate >= 0.9, || format!("\"like a\" in {with_like}/{} outputs", scope.len()))?;

    let tagger = LexiconTagger::new();
    let bart = read_records(&bart_out)?;
    ensure(bart.len() == literals.len(), || format!("{} bart records", bart.len()))?;
    let mut prefixed = 0;
    for r in &bart {
        let prefix = forced_prefix_for(&r.literal, &tagger).map_err(|e| e.to_string())?;
        if r.output.starts_with(&prefix) {
            prefixed += 1;
        }
    }
    ensure(prefixed == bart.len(), || format!("forced prefix kept in {prefixed}/{}", bart.len()))?;

    let before: Vec<Vec<u8>> = [&pairs, &scope_out, &bart_out]
        .iter()
        .map(|f| std::fs::read(f).unwrap_or_default())
        .collect();
    for m in &manifests {
        run(&["replay", p(m)])?;
    }
    let after: Vec<Vec<u8>> = [&pairs, &scope_out, &bart_out]
        .iter()
        .map(|f| std::fs::read(f).unwrap_or_default())
        .collect();
    ensure(before == after, || "outputs changed across replay".into())?;

    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(Verdict::Pass(format!(
        "\"like a\" {with_like}/50, forced prefix {prefixed}/50, {} manifests replayed, {elapsed:.1?}",
        manifests.len()
    )))
}

// ---------------------------------------------------------------- 7

fn dataset_shape() -> Check {
    let split = split_corpus((0..87_843u32).collect(), 0.94, 7).map_err(|e| e.to_string())?;
    let (t, v) = (split.train.len(), split.validation.len());
    let exact = simile_kit::harvest::train_size(87_843, 82_697.0 / 87_843.0);

    let tagger = LexiconTagger::new();
    let mut sentences = Vec::new();
    for cmp in ["like", "Like", "LIKE", "as", "As", "AS"] {
        for s in [
            format!("{cmp} it was cold."),
            format!("The night was {cmp} cold."),
            format!("It felt cold {cmp} ice, quietly."),
            format!("She was quiet, {cmp} always."),
            format!("It was {cmp} dark {cmp} a cave."),
            format!("They left fast, {cmp} usual."),
            format!("I {cmp} it, it was beautiful."),
        ] {
            sentences.push(s);
        }
    }
    let h = harvest_literals(&sentences, &tagger);
    ensure(h.kept.is_empty(), || {
        format!("kept {:?}", h.kept.iter().map(|l| l.to_record().text).collect::<Vec<_>>())
    })?;
    ensure(h.rejected_comparator == sentences.len(), || {
        format!("{} of {} rejected for a comparator", h.rejected_comparator, sentences.len())
    })?;
    let control = harvest_literals(&["The night was cold.", "The likeness was quiet."], &tagger);
    ensure(control.kept.len() == 2, || "comparator-free controls rejected".into())?;

    if (t, v) == (82_697, 5_146) {
        Ok(Verdict::Pass(format!("split {t}/{v}; {} comparator sentences rejected", sentences.len())))
    } else {
        Ok(Verdict::KnownFail(format!(
            "split {t}/{v}, target 82697/5146 (0.94 x 87843 = 82572.42, no rounding reaches 82697; \
             ratio 82697/87843 gives {exact}); {} comparator sentences rejected",
            sentences.len()
        )))
    }
}

// ---------------------------------------------------------------- 8

const OPENERS: &[&str] = &["I saw a dog.", "We sat on a bench.", "He opened the door.", "They ate lunch."];
const LITERALS: &[&str] = &[
    "The sky was beautiful.",
    "The night was cold.",
    "Her voice was quiet.",
    "The soup was hot.",
    "The room was dark.",
];

fn toy_stories() -> Vec<Story> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    (0..50)
        .map(|i| {
            let mut sentences: Vec<String> = (0..rng.gen_range(2..=5))
                .map(|_| OPENERS[rng.gen_range(0..OPENERS.len())].to_string())
                .collect();
            // every fifth story has nothing to replace
            if i % 5 != 0 {
                for _ in 0..rng.gen_range(1..=3) {
                    let at = rng.gen_range(0..=sentences.len());
                    sentences.insert(at, LITERALS[rng.gen_range(0..LITERALS.len())].to_string());
                }
            }
            Story {
                title: format!("Story {i}"),
                storyline: vec![],
                sentences,
            }
        })
        .collect()
}

fn stories() -> Check {
    let tagger = LexiconTagger::new();
    let edges = EdgeTable::from_edges(
        [("blue canvas", "beautiful"), ("glacier", "cold"), ("mouse", "quiet"), ("oven", "hot")].map(|(c, p)| {
            KnowledgeEdge {
                concept: c.into(),
                property: p.into(),
                weight: 1.0,
            }
        }),
    );
    let synonyms = SynonymTable::default();
    let system = SimileSystem::new(
        SystemKind::Rtrvl,
        Backend::Knowledge {
            edges: &edges,
            synonyms: &synonyms,
            article: ArticlePolicy::Fixed,
        },
        &tagger,
        GenerationConfig::default(),
    );

    let sky = Story {
        title: "Sky".into(),
        storyline: vec![],
        sentences: vec!["I saw a dog.".into(), "The sky was beautiful.".into()],
    };
    let e = embellish(&sky, &system, &tagger, 0);
    ensure(e.story.sentences[1] == "The sky was like a blue canvas.", || format!("sky story {e:?}"))?;

    let stories = toy_stories();
    let out = embellish_batch(&stories, &system, &tagger, 100);
    let again = embellish_batch(&stories, &system, &tagger, 100);
    ensure(out == again, || "same seed gave different stories".into())?;
    let mut replaced = 0;
    for (s, e) in stories.iter().zip(&out) {
        let changed: Vec<usize> = (0..s.sentences.len())
            .filter(|&i| s.sentences[i] != e.story.sentences[i])
            .collect();
        ensure(changed.len() <= 1 && e.story.sentences.len() == s.sentences.len(), || {
            format!("{}: sentences {changed:?} changed", s.title)
        })?;
        if let Some(&i) = changed.first() {
            replaced += 1;
            ensure(strip_terminal_modifier(&s.sentences[i], &tagger).is_ok(), || {
                format!("{}: replaced {:?}", s.title, s.sentences[i])
            })?;
            ensure(e.replaced_index == Some(i), || format!("{}: replaced_index {:?}", s.title, e.replaced_index))?;
        }
        let qualifies = s.sentences.iter().any(|x| strip_terminal_modifier(x, &tagger).is_ok());
        if !qualifies {
            ensure(e.story == *s && e.replaced_index.is_none(), || format!("{}: changed", s.title))?;
        }
    }
    ensure(replaced > 0, || "nothing was replaced".into())?;
    Ok(Verdict::Pass(format!("{replaced}/50 stories embellished, at most one sentence each, deterministic")))
}

// ----------------------------------------------------------------

fn main() {
    let checks: [NamedCheck; 8] = [
        ("corpus construction on the worked similes", table_two),
        ("retrieval baseline worked example", retrieval),
        ("BLEU oracle and embedding F1", metric_oracles),
        ("novelty oracle", novelty_oracle),
        ("pairwise aggregation", pairwise),
        ("end-to-end desk run with replay", end_to_end),
        ("dataset shape", dataset_shape),
        ("story post-processing", stories),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let started = Instant::now();
        let verdict = check();
        let ms = started.elapsed().as_millis();
        let line = match verdict {
            Ok(Verdict::Pass(d)) => format!("PASS {} {name}: {d}", i + 1),
            Ok(Verdict::KnownFail(d)) => format!("FAIL {} {name} (known, unattainable target): {d}", i + 1),
            Err(d) => {
                failed += 1;
                format!("FAIL {} {name}: {d}", i + 1)
            }
        };
        println!("{line} [{ms} ms]");
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
