//! Canonical dialogue corpus model: dialogues made of speaker-tagged
//! utterances, each carrying its gold mention spans.
//!
//! The on-disk form is UTF-8 JSON with offsets counted in Unicode scalar
//! values. [`save_corpus`] writes a byte-stable rendering so that
//! `load_corpus(save_corpus(c)) == c`.

mod stats;
mod validate;

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::MentionSpan;

pub use stats::{compute_stats, MeanSd, StatsReport};
pub use validate::{validate, Location, Violation, ViolationCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Speaker {
    A,
    B,
}

impl Speaker {
    pub fn as_str(&self) -> &'static str {
        match self {
            Speaker::A => "A",
            Speaker::B => "B",
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    /// 1-based position within the dialogue.
    pub index: usize,
    pub speaker: Speaker,
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<MentionSpan>,
}

impl Utterance {
    pub fn new(index: usize, speaker: Speaker, text: impl Into<String>) -> Self {
        Self { index, speaker, text: text.into(), mentions: Vec::new() }
    }

    pub fn with_mentions(mut self, mentions: Vec<MentionSpan>) -> Self {
        self.mentions = mentions;
        self
    }

    /// `"{speaker}: {text}"`, the line form used in prompts.
    pub fn line(&self) -> String {
        format!("{}: {}", self.speaker, self.text)
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub dialogue_id: String,
    /// Opaque identifier of the shared image set.
    pub image_set_id: String,
    pub category: Option<String>,
    pub utterances: Vec<Utterance>,
}

impl Dialogue {
    /// Utterance by its 1-based index.
    pub fn utterance(&self, index: usize) -> Option<&Utterance> {
        index.checked_sub(1).and_then(|i| self.utterances.get(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub dataset_id: String,
    pub dialogues: Vec<Dialogue>,
}

impl Corpus {
    pub fn dialogue(&self, id: &str) -> Option<&Dialogue> {
        self.dialogues.iter().find(|d| d.dialogue_id == id)
    }

    pub fn n_utterances(&self) -> usize {
        self.dialogues.iter().map(|d| d.utterances.len()).sum()
    }

    /// Every `(dialogue, utterance)` pair in corpus order.
    pub fn utterances(&self) -> impl Iterator<Item = (&Dialogue, &Utterance)> {
        self.dialogues.iter().flat_map(|d| d.utterances.iter().map(move |u| (d, u)))
    }

    /// A copy holding only the dialogues whose ids satisfy `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> Corpus {
        Corpus {
            dataset_id: self.dataset_id.clone(),
            dialogues: self.dialogues.iter().filter(|d| keep(&d.dialogue_id)).cloned().collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed corpus file: {0}")]
    MalformedFile(#[from] serde_json::Error),
    #[error("corpus violates {} invariant(s); first: {}", .0.len(), .0[0])]
    InvariantViolation(Vec<Violation>),
}

/// Parse and validate a canonical corpus document.
pub fn parse_corpus(json: &str) -> Result<Corpus, CorpusError> {
    let corpus: Corpus = serde_json::from_str(json)?;
    let violations = validate(&corpus);
    if violations.is_empty() {
        Ok(corpus)
    } else {
        Err(CorpusError::InvariantViolation(violations))
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let json = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_corpus(&json)
}

/// Canonical serialization: pretty JSON, two-space indent, trailing newline.
pub fn to_canonical_json(corpus: &Corpus) -> String {
    let mut out = serde_json::to_string_pretty(corpus).expect("corpus serializes");
    out.push('\n');
    out
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, to_canonical_json(corpus))
}
