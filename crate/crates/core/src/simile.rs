//! Simile structure and the splitting operations shared by every stage.
//!
//! A simile is read as `prefix COMPARATOR vehicle`: the prefix holds the topic,
//! the event and, when stated, the property; the comparator is a trigger
//! phrase such as "like a"; the vehicle runs to the end of the sentence.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tagger::{PosTag, Tagger};
use crate::text::{self, Token};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimileError {
    #[error("last content token {token:?} of {sentence:?} is not an adjective or adverb")]
    NotModifierFinal { sentence: String, token: String },
    #[error("sentence has no content tokens")]
    EmptySentence,
    #[error("literal sentence contains comparator token {0:?}")]
    ContainsComparator(String),
    #[error("trigger set must contain at least one non-empty phrase")]
    EmptyTriggerSet,
}

/// Comparator phrases that mark a self-labeled simile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTriggerConfig")]
pub struct TriggerConfig {
    trigger_phrases: Vec<String>,
    case_sensitive: bool,
    #[serde(skip)]
    phrase_tokens: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct RawTriggerConfig {
    trigger_phrases: Vec<String>,
    #[serde(default)]
    case_sensitive: bool,
}

impl TryFrom<RawTriggerConfig> for TriggerConfig {
    type Error = SimileError;

    fn try_from(raw: RawTriggerConfig) -> Result<Self, Self::Error> {
        TriggerConfig::new(raw.trigger_phrases, raw.case_sensitive)
    }
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self::new(["like a"], false).expect("default trigger set is valid")
    }
}

impl TriggerConfig {
    pub fn new<S: Into<String>>(
        phrases: impl IntoIterator<Item = S>,
        case_sensitive: bool,
    ) -> Result<Self, SimileError> {
        let mut trigger_phrases = Vec::new();
        let mut phrase_tokens = Vec::new();
        for p in phrases {
            let p: String = p.into();
            let p = if case_sensitive { p } else { p.to_lowercase() };
            let toks = text::words(&p);
            if toks.is_empty() {
                return Err(SimileError::EmptyTriggerSet);
            }
            trigger_phrases.push(toks.join(" "));
            phrase_tokens.push(toks);
        }
        if trigger_phrases.is_empty() {
            return Err(SimileError::EmptyTriggerSet);
        }
        Ok(Self {
            trigger_phrases,
            case_sensitive,
            phrase_tokens,
        })
    }

    /// Default set plus "like an".
    pub fn with_article_variants() -> Self {
        Self::new(["like a", "like an"], false).expect("valid")
    }

    pub fn phrases(&self) -> &[String] {
        &self.trigger_phrases
    }

    pub fn case_sensitive(&self) -> bool {
        self.case_sensitive
    }

    fn token_eq(&self, a: &str, b: &str) -> bool {
        if self.case_sensitive {
            a == b
        } else {
            a.to_lowercase() == b
        }
    }

    /// Earliest `(first_token, end_token)` match over all phrases; at equal
    /// positions the phrase listed first wins.
    pub fn find_in<S: AsRef<str>>(&self, tokens: &[S]) -> Option<(usize, usize)> {
        (0..tokens.len()).find_map(|i| {
            self.phrase_tokens.iter().find_map(|phrase| {
                let end = i + phrase.len();
                let hit = end <= tokens.len()
                    && phrase
                        .iter()
                        .zip(&tokens[i..end])
                        .all(|(p, t)| self.token_eq(t.as_ref(), p));
                hit.then_some((i, end))
            })
        })
    }

    /// Length of the trigger phrase at the very start of `tokens`, if any.
    pub fn leading_match<S: AsRef<str>>(&self, tokens: &[S]) -> Option<usize> {
        match self.find_in(tokens) {
            Some((0, end)) => Some(end),
            _ => None,
        }
    }
}

/// A sentence split at its comparator. Spans index into `raw_text`, so
/// reassembly is exact by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimileInstance {
    raw_text: String,
    comparator: Range<usize>,
    vehicle: Range<usize>,
    source_id: String,
}

impl SimileInstance {
    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    /// Text before the comparator, right-trimmed.
    pub fn prefix(&self) -> &str {
        self.raw_text[..self.comparator.start].trim_end()
    }

    pub fn comparator(&self) -> &str {
        &self.raw_text[self.comparator.clone()]
    }

    /// Text after the comparator through the end of the sentence, terminal
    /// punctuation included.
    pub fn vehicle(&self) -> &str {
        &self.raw_text[self.vehicle.clone()]
    }

    /// Vehicle without terminal punctuation; the concept handed to the
    /// knowledge backend.
    pub fn vehicle_phrase(&self) -> &str {
        text::split_trailing_punct(self.vehicle()).0
    }

    /// Terminal punctuation of the sentence (may be empty).
    pub fn terminal_punct(&self) -> &str {
        text::split_trailing_punct(self.vehicle()).1
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    pub fn prefix_tokens(&self) -> Vec<String> {
        text::words(self.prefix())
    }

    pub fn vehicle_tokens(&self) -> Vec<String> {
        text::words(self.vehicle())
    }

    /// prefix + comparator + vehicle with the original whitespace between them.
    pub fn reassemble(&self) -> String {
        let prefix = self.prefix();
        let mut out = String::with_capacity(self.raw_text.len());
        out.push_str(prefix);
        out.push_str(&self.raw_text[prefix.len()..self.comparator.start]);
        out.push_str(self.comparator());
        out.push_str(&self.raw_text[self.comparator.end..self.vehicle.start]);
        out.push_str(self.vehicle());
        out.push_str(&self.raw_text[self.vehicle.end..]);
        out
    }

    pub fn to_record(&self) -> SimileRecord {
        SimileRecord {
            text: self.raw_text.clone(),
            prefix: self.prefix().to_string(),
            vehicle: self.vehicle().to_string(),
            source_id: self.source_id.clone(),
        }
    }
}

/// JSONL wire form of a harvested simile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimileRecord {
    pub text: String,
    pub prefix: String,
    pub vehicle: String,
    pub source_id: String,
}

impl SimileRecord {
    /// Re-parses the stored text; `None` when it no longer contains a trigger.
    pub fn to_instance(&self, cfg: &TriggerConfig) -> Option<SimileInstance> {
        parse_simile(&self.text, cfg).map(|s| s.with_source_id(self.source_id.clone()))
    }
}

/// Splits `text` at its earliest trigger phrase. `None` when no trigger occurs
/// or nothing but punctuation follows it.
pub fn parse_simile(text: &str, cfg: &TriggerConfig) -> Option<SimileInstance> {
    let tokens = text::tokenize(text);
    let words: Vec<&str> = tokens.iter().map(|t| t.text).collect();
    let (first, end) = cfg.find_in(&words)?;
    let rest = &tokens[end..];
    if rest.iter().all(Token::is_punct) {
        return None;
    }
    let vehicle_start = rest[0].start;
    let vehicle_end = rest.last().map_or(text.len(), |t| t.end);
    Some(SimileInstance {
        raw_text: text.to_string(),
        comparator: tokens[first].start..tokens[end - 1].end,
        vehicle: vehicle_start..vehicle_end,
        source_id: String::new(),
    })
}

/// Result of removing the sentence-final adjective or adverb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrippedSentence {
    /// Everything before the property, right-trimmed.
    pub prefix: String,
    pub property: String,
    pub pos_tag: PosTag,
    /// Punctuation that followed the property.
    pub trailing: String,
}

impl StrippedSentence {
    pub fn prefix_tokens(&self) -> Vec<String> {
        text::words(&self.prefix)
    }

    /// Puts the property (or a replacement) back, with the trailing punctuation.
    pub fn rebuild_with(&self, replacement: &str) -> String {
        let mut out = if self.prefix.is_empty() {
            replacement.to_string()
        } else {
            format!("{} {}", self.prefix, replacement)
        };
        out.push_str(&self.trailing);
        out
    }
}

pub fn strip_terminal_modifier(
    text: &str,
    tagger: &dyn Tagger,
) -> Result<StrippedSentence, SimileError> {
    let tokens = text::tokenize(text);
    let last = tokens
        .iter()
        .rposition(|t| !t.is_punct())
        .ok_or(SimileError::EmptySentence)?;
    let words: Vec<&str> = tokens.iter().map(|t| t.text).collect();
    let tags = tagger.tag(&words);
    let tok = tokens[last];
    if !tags[last].is_modifier() {
        return Err(SimileError::NotModifierFinal {
            sentence: text.to_string(),
            token: tok.text.to_string(),
        });
    }
    Ok(StrippedSentence {
        prefix: text[..tok.start].trim_end().to_string(),
        property: tok.text.to_string(),
        pos_tag: tags[last],
        trailing: text[tok.end..].trim().to_string(),
    })
}

/// Tokens that count as comparators in literal sentences.
pub const LITERAL_COMPARATORS: &[&str] = &["like", "as"];

/// First comparator token ("like"/"as", any case) found in `text`.
pub fn comparator_token(text: &str) -> Option<String> {
    text::tokenize(text)
        .into_iter()
        .map(|t| t.text.to_lowercase())
        .find(|w| LITERAL_COMPARATORS.contains(&w.as_str()))
}

/// A comparator-free sentence ending in an adjective or adverb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralSentence {
    pub raw_text: String,
    pub prefix: String,
    pub property: String,
    pub pos_tag: PosTag,
    pub trailing: String,
}

impl LiteralSentence {
    pub fn parse(text: &str, tagger: &dyn Tagger) -> Result<Self, SimileError> {
        if let Some(tok) = comparator_token(text) {
            return Err(SimileError::ContainsComparator(tok));
        }
        let s = strip_terminal_modifier(text, tagger)?;
        Ok(Self {
            raw_text: text.to_string(),
            prefix: s.prefix,
            property: s.property,
            pos_tag: s.pos_tag,
            trailing: s.trailing,
        })
    }

    pub fn prefix_tokens(&self) -> Vec<String> {
        text::words(&self.prefix)
    }

    pub fn to_record(&self) -> LiteralRecord {
        LiteralRecord {
            text: self.raw_text.clone(),
            property: self.property.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralRecord {
    pub text: String,
    pub property: String,
}

/// Tokens of `generated` after its longest common token prefix with
/// `reference`. A comparator left at the head of the remainder (the case when
/// the reference is a literal rather than a simile prefix) is dropped too.
pub fn extract_generated_vehicle(
    generated: &str,
    reference: &str,
    cfg: &TriggerConfig,
) -> Vec<String> {
    let gen = text::words(generated);
    let reference = text::words(reference);
    let shared = gen
        .iter()
        .zip(&reference)
        .take_while(|(a, b)| a == b)
        .count();
    let rest = &gen[shared..];
    let skip = cfg.leading_match(rest).unwrap_or(0);
    rest[skip..].to_vec()
}
