use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::Corpus;
use crate::span::MentionSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationCode {
    DuplicateDialogueId,
    EmptyDialogue,
    NonContiguousIndex,
    EmptySpan,
    SpanOutOfBounds,
    UnsortedMentions,
    OverlapViolation,
    NestingViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Location {
    pub dialogue_id: String,
    pub utterance_index: Option<usize>,
    pub span: Option<MentionSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: Location,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} in dialogue {:?}", self.code, self.location.dialogue_id)?;
        if let Some(i) = self.location.utterance_index {
            write!(f, ", utterance {i}")?;
        }
        if let Some(s) = self.location.span {
            write!(f, ", span {s}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Check every corpus invariant, returning all violations found.
pub fn validate(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();

    for d in &corpus.dialogues {
        let at = |utt: Option<usize>, span: Option<MentionSpan>| Location {
            dialogue_id: d.dialogue_id.clone(),
            utterance_index: utt,
            span,
        };
        if !seen.insert(d.dialogue_id.as_str()) {
            out.push(Violation {
                code: ViolationCode::DuplicateDialogueId,
                location: at(None, None),
                detail: "dialogue id appears more than once".into(),
            });
        }
        if d.utterances.is_empty() {
            out.push(Violation {
                code: ViolationCode::EmptyDialogue,
                location: at(None, None),
                detail: "dialogue has no utterances".into(),
            });
        }

        for (pos, u) in d.utterances.iter().enumerate() {
            if u.index != pos + 1 {
                out.push(Violation {
                    code: ViolationCode::NonContiguousIndex,
                    location: at(Some(u.index), None),
                    detail: format!("expected index {}, found {}", pos + 1, u.index),
                });
            }
            let len = u.char_len();
            for s in &u.mentions {
                if s.start >= s.end {
                    out.push(Violation {
                        code: ViolationCode::EmptySpan,
                        location: at(Some(u.index), Some(*s)),
                        detail: "span must satisfy start < end".into(),
                    });
                } else if s.end > len {
                    out.push(Violation {
                        code: ViolationCode::SpanOutOfBounds,
                        location: at(Some(u.index), Some(*s)),
                        detail: format!("span end {} exceeds text length {len}", s.end),
                    });
                }
            }
            for w in u.mentions.windows(2) {
                if w[1].start < w[0].start {
                    out.push(Violation {
                        code: ViolationCode::UnsortedMentions,
                        location: at(Some(u.index), Some(w[1])),
                        detail: format!("{} starts before preceding {}", w[1], w[0]),
                    });
                }
            }
            for (i, a) in u.mentions.iter().enumerate() {
                for b in &u.mentions[i + 1..] {
                    if a.is_empty() || b.is_empty() || !a.overlaps(b) {
                        continue;
                    }
                    let code = if a.contains(b) || b.contains(a) {
                        ViolationCode::NestingViolation
                    } else {
                        ViolationCode::OverlapViolation
                    };
                    out.push(Violation {
                        code,
                        location: at(Some(u.index), Some(*b)),
                        detail: format!("{a} and {b} share characters"),
                    });
                }
            }
        }
    }
    out
}
