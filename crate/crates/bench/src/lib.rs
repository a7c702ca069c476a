//! Synthetic inputs for the benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use spanmark_core::constraint::{SpecialTokens, TokenId};
use spanmark_core::{MarkerConfig, MentionSpan, Vocab};

/// Every byte, every one- to three-letter lowercase piece with and without
/// a leading space, and bare and padded markers. About 37k entries.
pub fn large_vocab(cfg: &MarkerConfig) -> Vocab {
    let mut pieces: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
    let letters = b'a'..=b'z';
    let mut words: Vec<Vec<u8>> = letters.clone().map(|a| vec![a]).collect();
    for a in letters.clone() {
        for b in letters.clone() {
            words.push(vec![a, b]);
            for c in letters.clone() {
                words.push(vec![a, b, c]);
            }
        }
    }
    for w in words {
        let mut spaced = vec![b' '];
        spaced.extend(&w);
        pieces.push(spaced);
        if w.len() > 1 {
            pieces.push(w);
        }
    }
    let mut entries: BTreeMap<TokenId, Vec<u8>> =
        pieces.into_iter().enumerate().map(|(i, b)| (i as TokenId, b)).collect();
    let mut next = entries.len() as TokenId;
    let mut add = |s: String| {
        entries.insert(next, s.into_bytes());
        next += 1;
        next - 1
    };
    let start = BTreeSet::from([add(cfg.start_marker.clone()), add(format!(" {}", cfg.start_marker))]);
    let end = BTreeSet::from([add(cfg.end_marker.clone()), add(format!(" {}", cfg.end_marker))]);
    let special = SpecialTokens { start_marker_ids: start, end_marker_ids: end, eos_id: next };
    Vocab::new(entries, special, cfg).expect("synthetic vocab is valid")
}

/// A message of roughly `words` words.
pub fn message(words: usize) -> String {
    const LEXICON: &[&str] =
        &["the", "dark", "grey", "one", "is", "my", "second", "choice", "i", "think", "cup", "with", "a", "red", "lid"];
    (0..words).map(|i| LEXICON[(i * 7 + i / 3) % LEXICON.len()]).collect::<Vec<_>>().join(" ")
}

/// `n` disjoint spans over `[0, 10n)` shifted by `offset`.
pub fn spans(n: usize, offset: usize) -> Vec<MentionSpan> {
    (0..n).map(|i| MentionSpan::new(10 * i + offset, 10 * i + offset + 6)).collect()
}

/// Every `every`-th word of `text` as a span.
pub fn word_spans(text: &str, every: usize) -> Vec<MentionSpan> {
    let mut out = Vec::new();
    let mut pos = 0;
    for (i, w) in text.split(' ').enumerate() {
        let n = w.chars().count();
        if i % every == 0 {
            out.push(MentionSpan::new(pos, pos + n));
        }
        pos += n + 1;
    }
    out
}
