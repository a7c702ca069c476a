//! Training and inference records for the marker-reproduction task.
//!
//! A record for utterance `i` with history window `w` looks like
//!
//! ```text
//! B: Clear, I think ...\nA: I agree, ...\nB: yeap!\nB: then, ... okay?\n\nB: then, ... okay? ->
//! ```
//!
//! followed by the completion `B: then, ... is >> the dark grey << one okay?`.
//! The context block holds the `h = min(w, i - 1)` preceding messages and the
//! target itself, one per line. A blank line separates it from the repeated
//! target, which ends with the inference token. With no history the context
//! block and the blank line are dropped and the target appears once.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{render, AnnotationError, MarkerConfig};
use crate::corpus::Dialogue;
use crate::jsonl::{read_jsonl_file, write_jsonl_file, JsonlError};

pub const INFERENCE_TOKEN: &str = " -> ";

/// Maximum number of preceding messages supplied as history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowSpec(pub usize);

impl WindowSpec {
    /// History length actually available for the utterance at `index` (1-based).
    pub fn history_len(&self, index: usize) -> usize {
        self.0.min(index.saturating_sub(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub dialogue_id: String,
    pub utterance_index: usize,
    pub h: usize,
    pub prompt: String,
    pub completion: String,
    /// Character offset into `prompt + completion` where the loss begins.
    pub mask_boundary: usize,
}

impl Sample {
    pub fn full_text(&self) -> String {
        format!("{}{}", self.prompt, self.completion)
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("dialogue {dialogue_id} has no utterance {index}")]
    IndexOutOfRange { dialogue_id: String, index: usize },
    #[error("dialogue {dialogue_id}, utterance {index}: {source}")]
    Annotation {
        dialogue_id: String,
        index: usize,
        #[source]
        source: AnnotationError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

/// Builds prompts and completions with a fixed window, marker set and
/// inference token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBuilder {
    pub window: WindowSpec,
    pub markers: MarkerConfig,
    pub inference_token: String,
}

impl SampleBuilder {
    pub fn new(window: WindowSpec, markers: MarkerConfig) -> Self {
        Self { window, markers, inference_token: INFERENCE_TOKEN.to_owned() }
    }

    pub fn with_inference_token(mut self, token: impl Into<String>) -> Self {
        self.inference_token = token.into();
        self
    }

    /// The model input for utterance `index`. Gold spans are never consulted.
    pub fn prompt(&self, dialogue: &Dialogue, index: usize) -> Result<String, SampleError> {
        let target = dialogue.utterance(index).ok_or_else(|| SampleError::IndexOutOfRange {
            dialogue_id: dialogue.dialogue_id.clone(),
            index,
        })?;
        let h = self.window.history_len(index);
        let mut prompt = String::new();
        if h > 0 {
            for u in &dialogue.utterances[index - 1 - h..index] {
                prompt.push_str(&u.line());
                prompt.push('\n');
            }
            prompt.push('\n');
        }
        prompt.push_str(&target.line());
        prompt.push_str(&self.inference_token);
        Ok(prompt)
    }

    pub fn sample(&self, dialogue: &Dialogue, index: usize) -> Result<Sample, SampleError> {
        let prompt = self.prompt(dialogue, index)?;
        let target = &dialogue.utterances[index - 1];
        let annotated = render(&target.text, &target.mentions, &self.markers).map_err(|source| {
            SampleError::Annotation { dialogue_id: dialogue.dialogue_id.clone(), index, source }
        })?;
        Ok(Sample {
            dialogue_id: dialogue.dialogue_id.clone(),
            utterance_index: index,
            h: self.window.history_len(index),
            mask_boundary: prompt.chars().count(),
            completion: format!("{}: {annotated}", target.speaker),
            prompt,
        })
    }

    /// One sample per utterance, in dialogue order.
    pub fn dialogue_samples(&self, dialogue: &Dialogue) -> Result<Vec<Sample>, SampleError> {
        (1..=dialogue.utterances.len()).map(|i| self.sample(dialogue, i)).collect()
    }

    pub fn corpus_samples<'a>(
        &self,
        dialogues: impl IntoIterator<Item = &'a Dialogue>,
    ) -> Result<Vec<Sample>, SampleError> {
        let mut out = Vec::new();
        for d in dialogues {
            out.extend(self.dialogue_samples(d)?);
        }
        Ok(out)
    }
}

pub fn build_sample(
    dialogue: &Dialogue,
    index: usize,
    window: WindowSpec,
    markers: &MarkerConfig,
) -> Result<Sample, SampleError> {
    SampleBuilder::new(window, markers.clone()).sample(dialogue, index)
}

pub fn build_inference_prompt(
    dialogue: &Dialogue,
    index: usize,
    window: WindowSpec,
) -> Result<String, SampleError> {
    SampleBuilder::new(window, MarkerConfig::default()).prompt(dialogue, index)
}

pub fn export_jsonl(samples: &[Sample], path: impl AsRef<Path>) -> Result<usize, SampleError> {
    Ok(write_jsonl_file(samples, path)?)
}

pub fn import_jsonl(path: impl AsRef<Path>) -> Result<Vec<Sample>, SampleError> {
    Ok(read_jsonl_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Speaker, Utterance};
    use crate::jsonl::{read_jsonl, write_jsonl};
    use crate::span::MentionSpan;

    fn dialogue(n: usize) -> Dialogue {
        Dialogue {
            dialogue_id: "d".into(),
            image_set_id: "i".into(),
            category: None,
            utterances: (1..=n)
                .map(|i| {
                    let sp = if i % 2 == 1 { Speaker::A } else { Speaker::B };
                    Utterance::new(i, sp, format!("msg {i}"))
                        .with_mentions(vec![MentionSpan::new(4, 4 + i.to_string().len())])
                })
                .collect(),
        }
    }

    #[test]
    fn first_utterance_has_no_history() {
        let s = build_sample(&dialogue(3), 1, WindowSpec(0), &MarkerConfig::default()).unwrap();
        assert_eq!(s.h, 0);
        assert_eq!(s.prompt, "A: msg 1 -> ");
        assert_eq!(s.completion, "A: msg >> 1 <<");
        assert_eq!(s.mask_boundary, s.prompt.chars().count());
    }

    #[test]
    fn history_is_clamped() {
        let s = build_sample(&dialogue(2), 2, WindowSpec(19), &MarkerConfig::default()).unwrap();
        assert_eq!(s.h, 1);
        assert_eq!(s.prompt, "A: msg 1\nB: msg 2\n\nB: msg 2 -> ");
    }

    #[test]
    fn window_zero_keeps_single_target() {
        let p = build_inference_prompt(&dialogue(5), 4, WindowSpec(0)).unwrap();
        assert_eq!(p, "B: msg 4 -> ");
    }

    #[test]
    fn out_of_range() {
        let d = dialogue(2);
        for i in [0, 3] {
            assert!(matches!(
                build_inference_prompt(&d, i, WindowSpec(3)),
                Err(SampleError::IndexOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn inference_token_is_configurable() {
        let b = SampleBuilder::new(WindowSpec(0), MarkerConfig::default()).with_inference_token(" ->");
        assert_eq!(b.prompt(&dialogue(1), 1).unwrap(), "A: msg 1 ->");
    }

    #[test]
    fn jsonl_round_trip() {
        let b = SampleBuilder::new(WindowSpec(3), MarkerConfig::default());
        let samples = b.dialogue_samples(&dialogue(3)).unwrap();
        let mut buf = Vec::new();
        assert_eq!(write_jsonl(&samples, &mut buf).unwrap(), 3);
        assert_eq!(buf.iter().filter(|&&c| c == b'\n').count(), 3);
        let back: Vec<Sample> = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, samples);

        let mut empty = Vec::new();
        assert_eq!(write_jsonl::<Sample>(&[], &mut empty).unwrap(), 0);
        assert!(empty.is_empty());
    }
}
