//! Token-level B/I/O labels for sequence-labeling baselines.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dialogue, Utterance};
use crate::sample::WindowSpec;
use crate::span::{char_to_byte, MentionSpan};

#[derive(Debug, Error)]
pub enum IobError {
    #[error("tokenization does not match the utterance: {0}")]
    ViewMismatch(String),
    #[error("dialogue {dialogue_id} has no utterance {index}")]
    IndexOutOfRange { dialogue_id: String, index: usize },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Tokens of one utterance with character offsets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizationView {
    pub tokens: Vec<Token>,
}

impl TokenizationView {
    /// Maximal runs of non-whitespace.
    pub fn whitespace(text: &str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        let mut n = 0;
        for (i, c) in text.chars().enumerate() {
            n = i + 1;
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    tokens.push(Token { text: slice(text, s, i).to_owned(), start: s, end: i });
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push(Token { text: slice(text, s, n).to_owned(), start: s, end: n });
        }
        Self { tokens }
    }

    /// Check that offsets increase, do not overlap, stay inside `text` and
    /// that each token's text is the substring at its offsets.
    pub fn check(&self, text: &str) -> Result<(), IobError> {
        let n = text.chars().count();
        let mut prev_end = 0;
        for (k, t) in self.tokens.iter().enumerate() {
            if t.start >= t.end || t.end > n || t.start < prev_end {
                return Err(IobError::ViewMismatch(format!(
                    "token {k} at [{},{}) is empty, out of bounds or overlaps its predecessor",
                    t.start, t.end
                )));
            }
            if slice(text, t.start, t.end) != t.text {
                return Err(IobError::ViewMismatch(format!(
                    "token {k} is {:?} but the text at [{},{}) is {:?}",
                    t.text,
                    t.start,
                    t.end,
                    slice(text, t.start, t.end)
                )));
            }
            prev_end = t.end;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn slice(text: &str, start: usize, end: usize) -> &str {
    &text[char_to_byte(text, start)..char_to_byte(text, end)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IobLabel {
    B,
    I,
    O,
    Ignore,
}

impl fmt::Display for IobLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::B => "B",
            Self::I => "I",
            Self::O => "O",
            Self::Ignore => "IGNORE",
        })
    }
}

impl FromStr for IobLabel {
    type Err = String;

    /// Accepts `B`, `I`, `O`, `IGNORE` and typed forms such as `B-MENTION`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "B" => Ok(Self::B),
            "I" => Ok(Self::I),
            "O" => Ok(Self::O),
            "IGNORE" => Ok(Self::Ignore),
            _ if s.starts_with("B-") => Ok(Self::B),
            _ if s.starts_with("I-") => Ok(Self::I),
            _ => Err(format!("unknown label {s:?}")),
        }
    }
}

impl Serialize for IobLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IobLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which tokens count as part of a span whose boundary cuts through them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapPolicy {
    /// Any shared character puts the token in the span.
    #[default]
    AnyOverlap,
    /// Only tokens entirely inside the span belong to it.
    FullContainment,
}

impl OverlapPolicy {
    fn includes(self, token: &Token, span: &MentionSpan) -> bool {
        match self {
            Self::AnyOverlap => token.start < span.end && span.start < token.end,
            Self::FullContainment => span.start <= token.start && token.end <= span.end,
        }
    }
}

/// Label each token of `utterance`. A token belongs to the first span that
/// includes it under `policy`; the first token of each span is `B`.
pub fn to_iob(
    utterance: &Utterance,
    view: &TokenizationView,
    policy: OverlapPolicy,
) -> Result<Vec<IobLabel>, IobError> {
    view.check(&utterance.text)?;
    let mut labels = vec![IobLabel::O; view.len()];
    for span in &utterance.mentions {
        let mut first = true;
        for (k, t) in view.tokens.iter().enumerate() {
            if labels[k] != IobLabel::O || !policy.includes(t, span) {
                continue;
            }
            labels[k] = if first { IobLabel::B } else { IobLabel::I };
            first = false;
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodedSpans {
    pub spans: Vec<MentionSpan>,
    /// `I` labels that had no `B` or `I` before them and were read as `B`.
    pub repairs: usize,
}

/// Recover spans from labels: each `B I*` run becomes one span from the
/// first token's start to the last token's end. `IGNORE` acts like `O`.
pub fn from_iob(labels: &[IobLabel], view: &TokenizationView) -> Result<DecodedSpans, IobError> {
    if labels.len() != view.len() {
        return Err(IobError::ViewMismatch(format!("{} labels for {} tokens", labels.len(), view.len())));
    }
    let mut out = DecodedSpans::default();
    let mut open: Option<MentionSpan> = None;
    for (label, t) in labels.iter().zip(&view.tokens) {
        match label {
            IobLabel::I if open.is_some() => {
                open.as_mut().expect("checked").end = t.end;
            }
            IobLabel::B | IobLabel::I => {
                if *label == IobLabel::I {
                    out.repairs += 1;
                }
                out.spans.extend(open.take());
                open = Some(MentionSpan::new(t.start, t.end));
            }
            IobLabel::O | IobLabel::Ignore => out.spans.extend(open.take()),
        }
    }
    out.spans.extend(open);
    Ok(out)
}

/// A history window and its target, flattened to one token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub dialogue_id: String,
    pub index: usize,
    pub tokens: Vec<Token>,
    pub labels: Vec<IobLabel>,
    /// Positions of the target utterance's tokens.
    pub target_range: Range<usize>,
}

/// Label the window ending at utterance `index` (1-based). History tokens
/// are `IGNORE`. `views[i]` tokenizes utterance `i + 1`.
pub fn build_labeled_window(
    dialogue: &Dialogue,
    index: usize,
    window: WindowSpec,
    views: &[TokenizationView],
    policy: OverlapPolicy,
) -> Result<LabeledSequence, IobError> {
    let target = dialogue.utterance(index).ok_or_else(|| IobError::IndexOutOfRange {
        dialogue_id: dialogue.dialogue_id.clone(),
        index,
    })?;
    if views.len() < index {
        return Err(IobError::ViewMismatch(format!("{} views for utterance {index}", views.len())));
    }
    let h = window.history_len(index);
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for i in index - 1 - h..index - 1 {
        views[i].check(&dialogue.utterances[i].text)?;
        tokens.extend(views[i].tokens.iter().cloned());
        labels.extend(std::iter::repeat(IobLabel::Ignore).take(views[i].len()));
    }
    let start = tokens.len();
    let view = &views[index - 1];
    labels.extend(to_iob(target, view, policy)?);
    tokens.extend(view.tokens.iter().cloned());
    Ok(LabeledSequence {
        dialogue_id: dialogue.dialogue_id.clone(),
        index,
        target_range: start..tokens.len(),
        tokens,
        labels,
    })
}

/// Whitespace views for every utterance of `dialogue`.
pub fn whitespace_views(dialogue: &Dialogue) -> Vec<TokenizationView> {
    dialogue.utterances.iter().map(|u| TokenizationView::whitespace(&u.text)).collect()
}

/// One block of the tab-separated export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllBlock {
    pub dialogue_id: String,
    pub index: usize,
    pub rows: Vec<(Token, IobLabel)>,
}

impl From<&LabeledSequence> for ConllBlock {
    fn from(seq: &LabeledSequence) -> Self {
        Self {
            dialogue_id: seq.dialogue_id.clone(),
            index: seq.index,
            rows: seq.tokens.iter().cloned().zip(seq.labels.iter().copied()).collect(),
        }
    }
}

/// Write blocks as
///
/// ```text
/// # dialogue_id=d1 index=2
/// the<TAB>0<TAB>3<TAB>B
/// ```
///
/// with a blank line after each block. Offsets are characters into each
/// token's own utterance.
pub fn write_conll(blocks: &[ConllBlock], mut out: impl Write) -> io::Result<()> {
    for b in blocks {
        writeln!(out, "# dialogue_id={} index={}", b.dialogue_id, b.index)?;
        for (t, label) in &b.rows {
            writeln!(out, "{}\t{}\t{}\t{}", t.text, t.start, t.end, label)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_conll(input: impl BufRead) -> Result<Vec<ConllBlock>, IobError> {
    let mut blocks = Vec::new();
    let mut cur: Option<ConllBlock> = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let bad = |detail: String| IobError::Malformed { line: lineno, detail };
        if line.trim().is_empty() {
            blocks.extend(cur.take());
            continue;
        }
        if let Some(header) = line.strip_prefix("# ") {
            blocks.extend(cur.take());
            let (d, idx) = header
                .strip_prefix("dialogue_id=")
                .and_then(|h| h.rsplit_once(" index="))
                .ok_or_else(|| bad(format!("bad block header {line:?}")))?;
            let index = idx.parse().map_err(|_| bad(format!("bad utterance index {idx:?}")))?;
            cur = Some(ConllBlock { dialogue_id: d.to_owned(), index, rows: Vec::new() });
            continue;
        }
        let block = cur.as_mut().ok_or_else(|| bad("token line before any block header".into()))?;
        let cols: Vec<&str> = line.split('\t').collect();
        let [text, start, end, label] = cols[..] else {
            return Err(bad(format!("expected 4 tab-separated columns, found {}", cols.len())));
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad offset {s:?}")));
        let token = Token { text: text.to_owned(), start: num(start)?, end: num(end)? };
        block.rows.push((token, label.parse().map_err(bad)?));
    }
    blocks.extend(cur);
    Ok(blocks)
}
