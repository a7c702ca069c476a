//! Character-offset mention spans.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A half-open `[start, end)` range of Unicode scalar offsets into an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
}

impl MentionSpan {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of character indices shared with `other`.
    pub fn intersection(&self, other: &MentionSpan) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    /// Size of the union of both index sets.
    pub fn union(&self, other: &MentionSpan) -> usize {
        self.len() + other.len() - self.intersection(other)
    }

    pub fn overlaps(&self, other: &MentionSpan) -> bool {
        self.intersection(other) > 0
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &MentionSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// The substring of `text` covered by this span.
    ///
    /// Out-of-range offsets are clamped, so this never panics.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let lo = char_to_byte(text, self.start);
        let hi = char_to_byte(text, self.end);
        &text[lo..hi.max(lo)]
    }
}

impl fmt::Display for MentionSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// Byte offset of the `n`-th character of `text`, or `text.len()` past the end.
pub(crate) fn char_to_byte(text: &str, n: usize) -> usize {
    text.char_indices().nth(n).map_or(text.len(), |(b, _)| b)
}
