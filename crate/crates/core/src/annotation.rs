//! Marker-annotated reproductions of utterances.
//!
//! An utterance is reproduced verbatim with a start marker inserted before
//! each mention and an end marker after it:
//!
//! ```text
//! then, for the third one, is >> the dark grey << one okay?
//! ```
//!
//! With padding enabled, a marker that sits on a word boundary is written as
//! its own space-separated token, and a marker that falls inside a word is
//! inserted bare (`>>a<<b`). A start marker is on a boundary when it is at
//! the start of the text or follows whitespace; an end marker when it is at
//! the end of the text or precedes whitespace. The pad space is always on
//! the side facing the mention.
//!
//! Two extra rules make the form unambiguous:
//!
//! * With padding enabled, mentions may not begin or end with whitespace.
//!   Otherwise `a <<>> b` could come from either `[a][ b]` or `[a ][b]`.
//! * A rendering is *clean* when the marker strings occur in it exactly where
//!   markers were inserted. Text such as `x>y` with a mention starting at `y`
//!   would render as `x>>>y`, which is rejected as a marker collision.
//!
//! Under these rules [`render`] is injective, and [`parse`] recovers the spans
//! with a single left-to-right scan.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::MentionSpan;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkerConfig {
    pub start_marker: String,
    pub end_marker: String,
    pub pad_with_space: bool,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        Self { start_marker: ">>".into(), end_marker: "<<".into(), pad_with_space: true }
    }
}

impl MarkerConfig {
    pub fn new(start: &str, end: &str, pad_with_space: bool) -> Result<Self, AnnotationError> {
        let cfg = Self { start_marker: start.into(), end_marker: end.into(), pad_with_space };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn unpadded() -> Self {
        Self { pad_with_space: false, ..Self::default() }
    }

    pub fn check(&self) -> Result<(), AnnotationError> {
        let (s, e) = (&self.start_marker, &self.end_marker);
        if s.is_empty() || e.is_empty() {
            return Err(AnnotationError::InvalidMarkers("markers must be nonempty".into()));
        }
        if s.contains(e.as_str()) || e.contains(s.as_str()) {
            return Err(AnnotationError::InvalidMarkers(
                "markers must be distinct and neither may contain the other".into(),
            ));
        }
        Ok(())
    }

    /// True if `text` contains either marker string.
    pub fn collides(&self, text: &str) -> bool {
        text.contains(self.start_marker.as_str()) || text.contains(self.end_marker.as_str())
    }

    /// Written form of a start marker given the character before it.
    pub(crate) fn start_form(&self, prev: Option<char>) -> String {
        if self.pad_with_space && prev.map_or(true, char::is_whitespace) {
            format!("{} ", self.start_marker)
        } else {
            self.start_marker.clone()
        }
    }

    /// Written form of an end marker given the character after it.
    pub(crate) fn end_form(&self, next: Option<char>) -> String {
        if self.pad_with_space && next.map_or(true, char::is_whitespace) {
            format!(" {}", self.end_marker)
        } else {
            self.end_marker.clone()
        }
    }

    /// Spans must not start or end on whitespace when padding is enabled.
    pub(crate) fn requires_trimmed(&self) -> bool {
        self.pad_with_space
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("invalid marker configuration: {0}")]
    InvalidMarkers(String),
    #[error("span {0} is empty, out of bounds, overlapping or out of order")]
    InvalidSpan(MentionSpan),
    #[error("span {0} starts or ends with whitespace")]
    UntrimmedSpan(MentionSpan),
    #[error("text collides with a marker string")]
    MarkerCollision,
    #[error("content differs from the original at character {position}")]
    ContentMismatch { position: usize },
    #[error("unbalanced or nested markers at character {position}")]
    UnbalancedMarkers { position: usize },
    #[error("empty span at character {position}")]
    EmptySpan { position: usize },
    #[error("content continues after the original at character {position}")]
    TrailingContent { position: usize },
}

impl AnnotationError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidMarkers(_) => "InvalidMarkers",
            Self::InvalidSpan(_) => "InvalidSpan",
            Self::UntrimmedSpan(_) => "UntrimmedSpan",
            Self::MarkerCollision => "MarkerCollision",
            Self::ContentMismatch { .. } => "ContentMismatch",
            Self::UnbalancedMarkers { .. } => "UnbalancedMarkers",
            Self::EmptySpan { .. } => "EmptySpan",
            Self::TrailingContent { .. } => "TrailingContent",
        }
    }
}

/// An utterance paired with its annotated reproduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedUtterance {
    pub original: String,
    pub annotated: String,
    pub spans: Vec<MentionSpan>,
}

impl AnnotatedUtterance {
    pub fn new(
        original: &str,
        spans: &[MentionSpan],
        cfg: &MarkerConfig,
    ) -> Result<Self, AnnotationError> {
        Ok(Self {
            original: original.to_owned(),
            annotated: render(original, spans, cfg)?,
            spans: spans.to_vec(),
        })
    }
}

impl fmt::Display for AnnotatedUtterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.annotated)
    }
}

/// Insert markers around `spans` in `original`.
pub fn render(
    original: &str,
    spans: &[MentionSpan],
    cfg: &MarkerConfig,
) -> Result<String, AnnotationError> {
    cfg.check()?;
    let chars: Vec<char> = original.chars().collect();
    let n = chars.len();

    let mut prev_end = 0;
    for s in spans {
        if s.start >= s.end || s.end > n || s.start < prev_end {
            return Err(AnnotationError::InvalidSpan(*s));
        }
        if cfg.requires_trimmed()
            && (chars[s.start].is_whitespace() || chars[s.end - 1].is_whitespace())
        {
            return Err(AnnotationError::UntrimmedSpan(*s));
        }
        prev_end = s.end;
    }
    if cfg.collides(original) {
        return Err(AnnotationError::MarkerCollision);
    }

    let mut out = String::with_capacity(original.len() + spans.len() * 8);
    // Byte offsets at which marker strings were inserted, kept sorted.
    let mut inserted = Vec::with_capacity(spans.len() * 2);
    let mut next = spans.iter().peekable();
    let mut open: Option<&MentionSpan> = None;

    for p in 0..=n {
        if open.is_some_and(|s| s.end == p) {
            let form = cfg.end_form(chars.get(p).copied());
            inserted.push(out.len() + form.len() - cfg.end_marker.len());
            out.push_str(&form);
            open = None;
        }
        if let Some(s) = next.next_if(|s| s.start == p) {
            let prev = p.checked_sub(1).map(|i| chars[i]);
            inserted.push(out.len());
            out.push_str(&cfg.start_form(prev));
            open = Some(s);
        }
        if p < n {
            out.push(chars[p]);
        }
    }

    if marker_occurrences(&out, cfg) != inserted {
        return Err(AnnotationError::MarkerCollision);
    }
    Ok(out)
}

/// Byte offsets of every (possibly overlapping) occurrence of either marker.
pub(crate) fn marker_occurrences(s: &str, cfg: &MarkerConfig) -> Vec<usize> {
    let bytes = s.as_bytes();
    let (sm, em) = (cfg.start_marker.as_bytes(), cfg.end_marker.as_bytes());
    (0..bytes.len())
        .filter(|&i| bytes[i..].starts_with(sm) || bytes[i..].starts_with(em))
        .collect()
}

/// Recover mention spans from an annotated reproduction of `original`.
///
/// Accepts exactly the canonical renderings: markers must carry the pad
/// spaces the rules call for, and nothing else.
pub fn parse(
    annotated: &str,
    original: &str,
    cfg: &MarkerConfig,
) -> Result<Vec<MentionSpan>, AnnotationError> {
    cfg.check()?;
    let o: Vec<char> = original.chars().collect();
    let n = o.len();
    let (sm, em) = (cfg.start_marker.as_str(), cfg.end_marker.as_str());

    let mut spans = Vec::new();
    let mut rest = annotated;
    let mut p = 0;
    let mut open: Option<usize> = None;

    loop {
        if let Some(start) = open {
            let form = cfg.end_form(o.get(p).copied());
            if rest.starts_with(&form) {
                if p == start {
                    return Err(AnnotationError::EmptySpan { position: p });
                }
                if cfg.requires_trimmed() && o[p - 1].is_whitespace() {
                    return Err(AnnotationError::UntrimmedSpan(MentionSpan::new(start, p)));
                }
                spans.push(MentionSpan::new(start, p));
                open = None;
                rest = &rest[form.len()..];
            } else if rest.starts_with(sm) {
                return Err(AnnotationError::UnbalancedMarkers { position: p });
            } else if rest.starts_with(em) {
                // An end marker whose padding is wrong for this position.
                return Err(if p == start {
                    AnnotationError::EmptySpan { position: p }
                } else {
                    AnnotationError::ContentMismatch { position: p }
                });
            }
        }
        if open.is_none() {
            if rest.starts_with(sm) {
                if p == n {
                    return Err(AnnotationError::EmptySpan { position: p });
                }
                let form = cfg.start_form(p.checked_sub(1).map(|i| o[i]));
                if !rest.starts_with(&form) {
                    return Err(AnnotationError::ContentMismatch { position: p });
                }
                if cfg.requires_trimmed() && o[p].is_whitespace() {
                    return Err(AnnotationError::UntrimmedSpan(MentionSpan::new(p, p + 1)));
                }
                open = Some(p);
                rest = &rest[form.len()..];
                continue;
            }
            if rest.starts_with(em) {
                return Err(AnnotationError::UnbalancedMarkers { position: p });
            }
        }

        let Some(c) = rest.chars().next() else { break };
        if p == n {
            return Err(AnnotationError::TrailingContent { position: p });
        }
        if c != o[p] {
            return Err(AnnotationError::ContentMismatch { position: p });
        }
        p += 1;
        rest = &rest[c.len_utf8()..];
    }

    if open.is_some() {
        return Err(AnnotationError::UnbalancedMarkers { position: p });
    }
    if p < n {
        return Err(AnnotationError::ContentMismatch { position: p });
    }
    Ok(spans)
}

enum Piece<'a> {
    Text(&'a str),
    Start,
    End,
}

/// Remove markers and their canonical pad spaces without consulting the
/// original. Never fails; on canonical input this is the exact inverse of
/// [`render`]'s insertions.
pub fn strip_markers(annotated: &str, cfg: &MarkerConfig) -> String {
    let (sm, em) = (cfg.start_marker.as_str(), cfg.end_marker.as_str());
    if sm.is_empty() || em.is_empty() {
        return annotated.to_owned();
    }

    let mut pieces = Vec::new();
    let mut text_from = 0;
    let mut i = 0;
    while i < annotated.len() {
        let rest = &annotated[i..];
        let marker = if rest.starts_with(sm) {
            Some((Piece::Start, sm.len()))
        } else if rest.starts_with(em) {
            Some((Piece::End, em.len()))
        } else {
            None
        };
        match marker {
            Some((piece, len)) => {
                if text_from < i {
                    pieces.push(Piece::Text(&annotated[text_from..i]));
                }
                pieces.push(piece);
                i += len;
                text_from = i;
            }
            None => i += rest.chars().next().map_or(1, char::len_utf8),
        }
    }
    if text_from < annotated.len() {
        pieces.push(Piece::Text(&annotated[text_from..]));
    }

    let pad = cfg.pad_with_space;
    let mut out = String::with_capacity(annotated.len());
    let mut skip_leading_space = false;
    for (k, piece) in pieces.iter().enumerate() {
        match piece {
            Piece::Text(t) => {
                let t = if skip_leading_space { &t[1..] } else { t };
                skip_leading_space = false;
                out.push_str(t);
            }
            Piece::Start => {
                let at_boundary = out.chars().last().map_or(true, char::is_whitespace);
                if let Some(Piece::Text(t)) = pieces.get(k + 1) {
                    let mut cs = t.chars();
                    let padded = cs.next() == Some(' ')
                        && cs.next().is_some_and(|c| !c.is_whitespace());
                    skip_leading_space = pad && at_boundary && padded;
                }
            }
            Piece::End => {
                let next_original = pieces[k + 1..].iter().find_map(|p| match p {
                    Piece::Text(t) => t.chars().next(),
                    _ => None,
                });
                let mut tail = out.chars().rev();
                let padded =
                    tail.next() == Some(' ') && tail.next().is_some_and(|c| !c.is_whitespace());
                if pad && padded && next_original.map_or(true, char::is_whitespace) {
                    out.pop();
                }
            }
        }
    }
    out
}
