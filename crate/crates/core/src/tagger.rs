//! Part-of-speech tagging backend.
//!
//! Only one question is ever asked of the tagger in this crate: is the last
//! content word of a sentence an adjective or an adverb? [`LexiconTagger`] answers
//! it with a word list plus suffix rules. Any other tagger can be plugged in
//! through [`Tagger`]; implementations must be `Sync` because corpus building
//! and batch generation call them from worker threads.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Adjective,
    Adverb,
    Noun,
    Verb,
    Pronoun,
    Determiner,
    Preposition,
    Conjunction,
    Punct,
    Other,
}

impl PosTag {
    pub fn is_modifier(self) -> bool {
        matches!(self, PosTag::Adjective | PosTag::Adverb)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Adjective => "ADJ",
            PosTag::Adverb => "ADV",
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Pronoun => "PRON",
            PosTag::Determiner => "DET",
            PosTag::Preposition => "ADP",
            PosTag::Conjunction => "CONJ",
            PosTag::Punct => "PUNCT",
            PosTag::Other => "X",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = TaggerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "ADJ" | "JJ" | "A" => PosTag::Adjective,
            "ADV" | "RB" | "R" => PosTag::Adverb,
            "NOUN" | "NN" | "N" => PosTag::Noun,
            "VERB" | "VB" | "V" => PosTag::Verb,
            "PRON" | "PRP" => PosTag::Pronoun,
            "DET" | "DT" => PosTag::Determiner,
            "ADP" | "IN" => PosTag::Preposition,
            "CONJ" | "CC" => PosTag::Conjunction,
            "PUNCT" => PosTag::Punct,
            "X" | "OTHER" => PosTag::Other,
            other => return Err(TaggerError::UnknownTag(other.to_string())),
        })
    }
}

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("unknown part-of-speech tag {0:?}")]
    UnknownTag(String),
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Tagger: Send + Sync {
    /// Tags every token of a sentence. The output has the same length as `tokens`.
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag>;
}

const ADJECTIVES: &[&str] = &[
    "afraid", "alive", "alone", "angry", "ashamed", "awake", "aware", "bad", "big", "bitter",
    "black", "blue", "bold", "brave", "bright", "brief", "broken", "busy", "calm", "cheap",
    "clean", "clear", "clever", "close", "cold", "cool", "crazy", "cruel", "curious", "cute",
    "damp", "dark", "dead", "deep", "dirty", "dizzy", "drunk", "dry", "dull", "dumb", "eager",
    "early", "easy", "elegant", "empty", "evil", "exhausted", "faint", "fair", "false",
    "famous", "fascinated", "fat", "fierce", "fine", "firm", "flat", "fond", "free", "fresh",
    "friendly", "full", "funny", "gentle", "giant", "glad", "gold", "golden", "good", "gorgeous",
    "grand", "gray", "great", "green", "grey", "grim", "happy", "hard", "harsh", "heavy", "high",
    "holy", "hot", "huge", "hungry", "icy", "ill", "kind", "large", "lazy", "light", "little",
    "lively", "lonely", "long", "loose", "lost", "loud", "lovely", "low", "lucky", "mad", "mean",
    "messy", "mild", "modern", "naive", "narrow", "nasty", "neat", "nervous", "new", "nice",
    "noisy", "obscene", "odd", "old", "pale", "perfect", "pink", "plain", "polite", "poor",
    "pretty", "proud", "pure", "purple", "quick", "quiet", "rare", "raw", "ready", "real", "red",
    "relaxed", "rich", "ripe", "rough", "round", "rude", "sad", "safe", "scared", "sharp",
    "shiny", "short", "shy", "sick", "silent", "silly", "simple", "sleepy", "slim", "slow",
    "small", "smart", "smooth", "sneaky", "soft", "solid", "sore", "sorry", "sour", "stiff",
    "still", "strange", "strong", "stupid", "sturdy", "sudden", "sweet", "swift", "tall",
    "tame", "tense", "thick", "thin", "tidy", "tight", "tiny", "tired", "tough", "true", "ugly",
    "uneasy", "vast", "warm", "weak", "weary", "weird", "wet", "white", "whole", "wide", "wild",
    "wise", "wrong", "yellow", "young",
];

const ADVERBS: &[&str] = &[
    "again", "ahead", "almost", "already", "always", "anyway", "away", "back", "down", "else",
    "enough", "even", "ever", "far", "fast", "forever", "here", "indoors", "inside", "later",
    "late", "maybe", "much", "never", "now", "often", "once", "outside", "quite", "rather",
    "seldom", "sometimes", "soon", "somewhere", "then", "there", "today", "together",
    "tomorrow", "tonight", "too", "twice", "very", "well", "yesterday", "yet",
];

/// Words that look like modifiers by suffix but are not, or that the suffix
/// rules would otherwise miss.
const NOUN_EXCEPTIONS: &[&str] = &[
    "animal", "arrival", "capital", "festival", "hospital", "journal", "metal",
    "music", "magic", "traffic", "panic", "picnic", "topic", "basic", "republic", "family",
    "fly", "butterfly", "ally", "belly", "bully", "jelly", "lily", "rally", "supply", "reply",
    "assembly", "anomaly", "medal", "petal", "pedal", "signal", "crystal", "rival", "portal",
    "total", "spiral", "plant", "giant", "elephant", "servant", "tenant", "client", "parent",
    "student", "moment", "event", "agent", "talent", "comment", "element", "accident", "tent",
    "cent", "scent", "percent", "olive", "motive", "native", "detective", "relative", "table",
    "cable", "fable", "stable", "vegetable", "bible", "ship",
];

const PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "you", "your", "yours", "he", "him", "his", "she", "her", "hers",
    "it", "its", "we", "us", "our", "they", "them", "their", "this", "that", "these", "those",
    "myself", "yourself", "himself", "herself", "itself", "themselves", "someone", "everyone",
    "something", "everything", "nothing", "anything",
];
const DETERMINERS: &[&str] = &["a", "an", "the", "every", "each", "some", "any", "no", "all"];
const PREPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "to", "from", "by", "with", "without", "into", "onto", "through",
    "across", "over", "under", "about", "after", "before", "for", "like", "as", "near",
    "toward", "towards", "upon", "around", "between", "behind", "against", "within",
];
const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor", "so", "because", "if", "while", "when"];
const VERBS: &[&str] = &[
    "is", "was", "were", "are", "am", "be", "been", "being", "has", "have", "had", "do", "does",
    "did", "feel", "felt", "seem", "seemed", "look", "looked", "became", "become", "saw", "see",
    "ran", "run", "went", "go", "came", "come", "said", "say", "got", "get", "made", "make",
    "knew", "know", "took", "take", "thought", "think", "stormed", "walked", "wanted",
];

const ADJECTIVE_SUFFIXES: &[&str] = &[
    "ful", "ous", "ive", "able", "ible", "less", "ish", "ic", "ical", "al", "ant", "ent", "esque",
];

/// Lexicon-and-suffix tagger. Stateless after construction; safe to share.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    lexicon: HashMap<String, PosTag>,
}

impl Default for LexiconTagger {
    fn default() -> Self {
        let mut lexicon = HashMap::new();
        let groups: [(&[&str], PosTag); 8] = [
            (NOUN_EXCEPTIONS, PosTag::Noun),
            (VERBS, PosTag::Verb),
            (CONJUNCTIONS, PosTag::Conjunction),
            (PREPOSITIONS, PosTag::Preposition),
            (DETERMINERS, PosTag::Determiner),
            (PRONOUNS, PosTag::Pronoun),
            (ADVERBS, PosTag::Adverb),
            (ADJECTIVES, PosTag::Adjective),
        ];
        for (words, tag) in groups {
            for w in words {
                lexicon.insert((*w).to_string(), tag);
            }
        }
        Self { lexicon }
    }
}

impl LexiconTagger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Overrides or extends the built-in lexicon.
    pub fn insert(&mut self, word: &str, tag: PosTag) {
        self.lexicon.insert(word.to_lowercase(), tag);
    }

    pub fn with_entries<'a>(mut self, entries: impl IntoIterator<Item = (&'a str, PosTag)>) -> Self {
        for (w, t) in entries {
            self.insert(w, t);
        }
        self
    }

    /// Loads `word<TAB>TAG` lines on top of the built-in lexicon.
    pub fn with_lexicon_file(mut self, path: &Path) -> Result<Self, TaggerError> {
        let content = std::fs::read_to_string(path)?;
        for (idx, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| TaggerError::Parse {
                line: idx + 1,
                message: "expected word<TAB>tag".into(),
            })?;
            let tag = tag.parse().map_err(|e: TaggerError| TaggerError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            self.insert(word, tag);
        }
        Ok(self)
    }

    pub fn tag_word(&self, word: &str) -> PosTag {
        if crate::text::is_punct(word) {
            return PosTag::Punct;
        }
        let lower = word.to_lowercase();
        if let Some(&tag) = self.lexicon.get(&lower) {
            return tag;
        }
        if lower.chars().all(|c| c.is_ascii_digit()) {
            return PosTag::Other;
        }
        if lower.len() > 4 && lower.ends_with("ly") {
            return PosTag::Adverb;
        }
        if ADJECTIVE_SUFFIXES
            .iter()
            .any(|s| lower.len() > s.len() + 2 && lower.ends_with(s))
        {
            return PosTag::Adjective;
        }
        PosTag::Noun
    }
}

impl Tagger for LexiconTagger {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag> {
        tokens.iter().map(|t| self.tag_word(t)).collect()
    }
}
