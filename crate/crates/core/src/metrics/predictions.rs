use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::Corpus;
use crate::jsonl::{read_jsonl_file, write_jsonl_file};
use crate::span::MentionSpan;

/// `(dialogue_id, utterance_index)`.
pub type UtteranceKey = (String, usize);

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub dialogue_id: String,
    pub index: usize,
    #[serde(default)]
    pub spans: Vec<MentionSpan>,
    #[serde(default)]
    pub parse_error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prediction {
    pub spans: Vec<MentionSpan>,
    /// Set when the model output could not be parsed. Such an utterance is
    /// scored as having no predicted spans.
    pub parse_error: Option<String>,
}

/// Spans per utterance, either predicted or gold.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    entries: BTreeMap<UtteranceKey, Prediction>,
}

impl PredictionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The gold annotations of `corpus`, in the same shape as predictions.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let entries = corpus
            .utterances()
            .map(|(d, u)| {
                ((d.dialogue_id.clone(), u.index), Prediction { spans: u.mentions.clone(), parse_error: None })
            })
            .collect();
        Self { entries }
    }

    pub fn from_records(records: Vec<PredictionRecord>) -> Result<Self, MetricsError> {
        let mut set = Self::new();
        for r in records {
            let key = (r.dialogue_id, r.index);
            if set.entries.contains_key(&key) {
                return Err(MetricsError::DuplicateKey(key.0, key.1));
            }
            set.entries.insert(key, Prediction { spans: r.spans, parse_error: r.parse_error });
        }
        Ok(set)
    }

    pub fn to_records(&self) -> Vec<PredictionRecord> {
        self.entries
            .iter()
            .map(|((d, i), p)| PredictionRecord {
                dialogue_id: d.clone(),
                index: *i,
                spans: p.spans.clone(),
                parse_error: p.parse_error.clone(),
            })
            .collect()
    }

    pub fn insert(&mut self, dialogue_id: impl Into<String>, index: usize, prediction: Prediction) {
        self.entries.insert((dialogue_id.into(), index), prediction);
    }

    pub fn get(&self, dialogue_id: &str, index: usize) -> Option<&Prediction> {
        self.entries.get(&(dialogue_id.to_owned(), index))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UtteranceKey, &Prediction)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &UtteranceKey> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse_failures(&self) -> usize {
        self.entries.values().filter(|p| p.parse_error.is_some()).count()
    }

    pub fn n_spans(&self) -> usize {
        self.entries.values().filter(|p| p.parse_error.is_none()).map(|p| p.spans.len()).sum()
    }

    /// Only the entries whose key is also in `other`.
    pub fn restricted_to(&self, other: &PredictionSet) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| other.entries.contains_key(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { entries }
    }

    /// Check that every key names an utterance of `corpus` and every span is
    /// sorted, disjoint, nonempty and in bounds.
    pub fn validate_against(&self, corpus: &Corpus) -> Result<(), MetricsError> {
        let lengths: BTreeMap<(&str, usize), usize> =
            corpus.utterances().map(|(d, u)| ((d.dialogue_id.as_str(), u.index), u.char_len())).collect();
        for ((d, i), p) in &self.entries {
            let Some(&len) = lengths.get(&(d.as_str(), *i)) else {
                return Err(MetricsError::UnknownUtterance(d.clone(), *i));
            };
            let mut prev_end = 0;
            for s in &p.spans {
                if s.start >= s.end || s.end > len || s.start < prev_end {
                    return Err(MetricsError::InvalidSpan { dialogue_id: d.clone(), index: *i, span: *s });
                }
                prev_end = s.end;
            }
        }
        Ok(())
    }
}

/// Spans to score for one utterance: none when the output was unparseable.
pub(crate) fn scored(p: &Prediction) -> &[MentionSpan] {
    if p.parse_error.is_some() {
        &[]
    } else {
        &p.spans
    }
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionSet, MetricsError> {
    PredictionSet::from_records(read_jsonl_file(path)?)
}

pub fn save_predictions(set: &PredictionSet, path: impl AsRef<Path>) -> Result<usize, MetricsError> {
    Ok(write_jsonl_file(&set.to_records(), path)?)
}
