//! Shared tokenizer, detokenizer and sentence splitter.
//!
//! Every module tokenizes through [`tokenize`] so that prefixes, vehicles and
//! metric inputs line up token for token. Words are maximal alphanumeric runs
//! (apostrophes and hyphens are kept when they sit between two alphanumeric
//! characters, so `Francis's` and `well-known` stay whole); every other
//! non-whitespace character is its own token.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

impl Token<'_> {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn is_punct(&self) -> bool {
        is_punct(self.text)
    }
}

/// True when the token carries no alphanumeric character.
pub fn is_punct(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_alphanumeric)
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '’' | '-')
}

pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '<' {
            // markup-style special tokens such as `<MASK>` stay whole
            let mut j = i + 1;
            while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || matches!(chars[j].1, '_' | '/')) {
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j].1 == '>' {
                let end = chars[j].0 + 1;
                tokens.push(Token {
                    text: &text[start..end],
                    start,
                    end,
                });
                i = j + 1;
                continue;
            }
        }
        if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < chars.len() {
                let cj = chars[j].1;
                if cj.is_alphanumeric() {
                    j += 1;
                } else if is_joiner(cj)
                    && j + 1 < chars.len()
                    && chars[j + 1].1.is_alphanumeric()
                {
                    j += 2;
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
            tokens.push(Token {
                text: &text[start..end],
                start,
                end,
            });
            i = j;
        } else {
            let end = start + c.len_utf8();
            tokens.push(Token {
                text: &text[start..end],
                start,
                end,
            });
            i += 1;
        }
    }
    tokens
}

/// Owned token strings.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text.to_string()).collect()
}

fn attaches_left(token: &str) -> bool {
    matches!(
        token,
        "." | "," | "!" | "?" | ";" | ":" | ")" | "]" | "}" | "%" | "…"
    )
}

fn attaches_right(token: &str) -> bool {
    matches!(token, "(" | "[" | "{")
}

/// Joins tokens with single spaces, except around punctuation that
/// conventionally attaches to its neighbour.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    for tok in tokens {
        let tok = tok.as_ref();
        if !glue_next && !attaches_left(tok) {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = attaches_right(tok);
    }
    out
}

/// Appends `tokens` to an existing string using the detokenizer's spacing.
pub fn append_tokens<S: AsRef<str>>(base: &str, tokens: &[S]) -> String {
    if tokens.is_empty() {
        return base.to_string();
    }
    let tail = detokenize(tokens);
    let first = tokens[0].as_ref();
    if base.is_empty() || attaches_left(first) || base.ends_with(char::is_whitespace) {
        format!("{base}{tail}")
    } else {
        format!("{base} {tail}")
    }
}

/// Splits the trailing punctuation (and closing quotes) off a string.
/// Returns `(body, trailing)` where `body` is right-trimmed.
pub fn split_trailing_punct(text: &str) -> (&str, &str) {
    let trimmed = text.trim_end();
    let cut = trimmed
        .char_indices()
        .rev()
        .take_while(|&(_, c)| !c.is_alphanumeric() && !c.is_whitespace())
        .last()
        .map_or(trimmed.len(), |(i, _)| i);
    (trimmed[..cut].trim_end(), &trimmed[cut..])
}

/// Lowercases, drops punctuation tokens and joins with single spaces.
pub fn normalize_key(text: &str) -> String {
    tokenize(text)
        .into_iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.text.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "prof", "vs", "etc", "e.g", "i.e", "mt",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']')
}

/// Rule-based sentence splitter: a sentence ends at a run of terminal
/// punctuation (plus closing quotes) followed by whitespace, or at a newline.
/// A single period after a known abbreviation or a lone capital initial does
/// not end a sentence.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    fn push<'a>(text: &'a str, s: usize, e: usize, out: &mut Vec<&'a str>) {
        let piece = text[s..e].trim();
        if !piece.is_empty() {
            out.push(piece);
        }
    }
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c == '\n' {
            push(text, start, pos, &mut out);
            start = pos + 1;
            i += 1;
            continue;
        }
        if is_terminal(c) {
            let mut j = i;
            while j < chars.len() && is_terminal(chars[j].1) {
                j += 1;
            }
            while j < chars.len() && is_closer(chars[j].1) {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
            let at_break = j >= chars.len() || chars[j].1.is_whitespace();
            let single_period = c == '.' && j == i + 1;
            if at_break && !(single_period && is_abbreviation(&text[start..pos])) {
                push(text, start, end, &mut out);
                start = end;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if start < text.len() {
        push(text, start, text.len(), &mut out);
    }
    out
}

fn is_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(|c: char| c.is_whitespace())
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    if word.chars().count() == 1 && word.chars().all(char::is_uppercase) {
        return true;
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}
