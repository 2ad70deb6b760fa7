//! Story embellishment: one literal sentence of a generated story is swapped
//! for a simile, plus title → storyline → story plumbing around [`lm::generate`].

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::SimileGenerator;
use crate::jsonl::{self, JsonlError};
use crate::lm::{self, GenerationConfig, Generator, LmError};
use crate::par;
use crate::simile::strip_terminal_modifier;
use crate::tagger::Tagger;
use crate::text;

#[derive(Debug, Error)]
pub enum StoryError {
    #[error("title is empty")]
    EmptyTitle,
    #[error("storyline for {0:?} has no keywords")]
    EmptyStoryline(String),
    #[error("story for {0:?} has no sentences")]
    EmptyStory(String),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub title: String,
    #[serde(default)]
    pub storyline: Vec<String>,
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbellishedStory {
    #[serde(flatten)]
    pub story: Story,
    pub replaced_index: Option<usize>,
    pub original_sentence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Index of a sentence ending in an adjective or adverb, chosen uniformly
/// with a seeded RNG.
pub fn select_replaceable(story: &Story, tagger: &dyn Tagger, seed: u64) -> Option<usize> {
    let candidates: Vec<usize> = story
        .sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| strip_terminal_modifier(s, tagger).is_ok())
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Some(candidates[rng.gen_range(0..candidates.len())])
}

/// Replaces at most one sentence. Generator failures leave the story intact
/// and are reported in `warning`.
pub fn embellish(story: &Story, generator: &dyn SimileGenerator, tagger: &dyn Tagger, seed: u64) -> EmbellishedStory {
    let unchanged = |warning: Option<String>| EmbellishedStory {
        story: story.clone(),
        replaced_index: None,
        original_sentence: None,
        warning,
    };
    let Some(i) = select_replaceable(story, tagger, seed) else {
        return unchanged(None);
    };
    let original = &story.sentences[i];
    match generator.simile(original) {
        Ok(Some(simile)) if !simile.trim().is_empty() => {
            let mut out = story.clone();
            out.sentences[i] = simile;
            EmbellishedStory {
                story: out,
                replaced_index: Some(i),
                original_sentence: Some(original.clone()),
                warning: None,
            }
        }
        Ok(_) => unchanged(Some(format!("no simile for sentence {i}"))),
        Err(e) => {
            log::warn!("story {:?}: {e}", story.title);
            unchanged(Some(e.to_string()))
        }
    }
}

/// Embellishes each story with its own seed, `seed + index`.
pub fn embellish_batch(
    stories: &[Story],
    generator: &dyn SimileGenerator,
    tagger: &dyn Tagger,
    seed: u64,
) -> Vec<EmbellishedStory> {
    par::map_indexed(stories, |i, s| embellish(s, generator, tagger, seed.wrapping_add(i as u64)))
}

/// Title → storyline keywords (one call), then one sentence per keyword.
/// The story model sees `title <sep> keyword` as its source.
pub fn generate_story(
    title: &str,
    storyline_model: &dyn Generator,
    story_model: &dyn Generator,
    cfg: &GenerationConfig,
) -> Result<Story, StoryError> {
    let title = title.trim();
    if title.is_empty() {
        return Err(StoryError::EmptyTitle);
    }
    let cfg = GenerationConfig {
        forced_prefix: None,
        ..cfg.clone()
    };
    let line = lm::generate(title, &cfg, storyline_model)?.text;
    let storyline: Vec<String> = text::words(&line)
        .into_iter()
        .filter(|w| !text::is_punct(w))
        .collect();
    if storyline.is_empty() {
        return Err(StoryError::EmptyStoryline(title.to_string()));
    }
    let mut sentences = Vec::with_capacity(storyline.len());
    for keyword in &storyline {
        let generated = lm::generate(&format!("{title} {STORY_SEP} {keyword}"), &cfg, story_model)?.text;
        if let Some(first) = text::split_sentences(&generated).first() {
            sentences.push(first.to_string());
        }
    }
    if sentences.is_empty() {
        return Err(StoryError::EmptyStory(title.to_string()));
    }
    Ok(Story {
        title: title.to_string(),
        storyline,
        sentences,
    })
}

/// Separator between title and keyword in story-model sources.
pub const STORY_SEP: &str = "<SEP>";

pub fn read_stories(path: &Path) -> Result<Vec<Story>, StoryError> {
    Ok(jsonl::read(path)?)
}

pub fn write_embellished(path: &Path, stories: &[EmbellishedStory]) -> Result<(), StoryError> {
    Ok(jsonl::write(path, stories)?)
}
