//! Seeded random inputs for the randomized checks.
#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use spanmark_core::constraint::{SpecialTokens, TokenId, Vocab};
use spanmark_core::{Corpus, Dialogue, MarkerConfig, MentionSpan, Speaker, Utterance};

/// Characters for free-form utterances. Includes multibyte characters and
/// lone marker characters.
pub const TEXT_ALPHABET: &[char] = &['a', 'b', 'c', ' ', ' ', 'é', '漢', ',', '?', '>', '<', '\u{1F600}'];

const WORDS: &[&str] = &[
    "the", "dark", "grey", "one", "okay", "I", "you", "have", "a", "dog", "with", "red", "collar", "no",
    "yes", "left", "car", "is", "that", "it", "café", "my", "picture", "shows", "two", "cakes", "?",
];

pub struct Gen(ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn text(&mut self, alphabet: &[char], max_len: usize) -> String {
        let n = self.range(0, max_len);
        (0..n).map(|_| *self.pick(alphabet)).collect()
    }

    /// Words from a small lexicon separated by single spaces.
    pub fn sentence(&mut self, max_words: usize) -> String {
        let n = self.range(1, max_words);
        (0..n).map(|_| *self.pick(WORDS)).collect::<Vec<_>>().join(" ")
    }

    /// Up to `max` disjoint nonempty spans over `n` characters.
    pub fn spans(&mut self, n: usize, max: usize) -> Vec<MentionSpan> {
        let want = self.range(0, max).min((n + 1) / 2);
        let mut cuts: Vec<usize> = (0..2 * want).map(|_| self.range(0, n)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        cuts.chunks_exact(2).map(|c| MentionSpan::new(c[0], c[1])).collect()
    }

    /// Like [`Gen::spans`] but with no span starting or ending on whitespace.
    pub fn trimmed_spans(&mut self, text: &str, max: usize) -> Vec<MentionSpan> {
        let chars: Vec<char> = text.chars().collect();
        trim_spans(&chars, self.spans(chars.len(), max))
    }

    /// Spans covering whole words of `text`.
    pub fn word_spans(&mut self, text: &str, max: usize) -> Vec<MentionSpan> {
        let words = word_bounds(text);
        let n = words.len();
        self.spans(n, max)
            .into_iter()
            .map(|s| MentionSpan::new(words[s.start].0, words[s.end - 1].1))
            .collect()
    }

    /// Word-aligned spans on some utterances, arbitrary trimmed spans on others.
    pub fn mentions(&mut self, text: &str) -> Vec<MentionSpan> {
        if self.chance(70) {
            self.word_spans(text, 3)
        } else {
            self.trimmed_spans(text, 3)
        }
    }

    pub fn dialogue(&mut self, id: &str, category: Option<&str>, max_utterances: usize) -> Dialogue {
        let n = self.range(1, max_utterances);
        let utterances = (1..=n)
            .map(|i| {
                let text = self.sentence(9);
                let mentions = self.mentions(&text);
                Utterance::new(i, if i % 2 == 1 { Speaker::A } else { Speaker::B }, text).with_mentions(mentions)
            })
            .collect();
        Dialogue {
            dialogue_id: id.to_owned(),
            image_set_id: format!("set-{}", self.below(1000)),
            category: category.map(str::to_owned),
            utterances,
        }
    }

    pub fn corpus(&mut self, dataset_id: &str, dialogues: usize, max_utterances: usize) -> Corpus {
        Corpus {
            dataset_id: dataset_id.to_owned(),
            dialogues: (0..dialogues)
                .map(|i| self.dialogue(&format!("{dataset_id}-{i:03}"), None, max_utterances))
                .collect(),
        }
    }
}

pub fn trim_spans(chars: &[char], spans: Vec<MentionSpan>) -> Vec<MentionSpan> {
    spans
        .into_iter()
        .filter_map(|mut s| {
            while s.start < s.end && chars[s.start].is_whitespace() {
                s.start += 1;
            }
            while s.start < s.end && chars[s.end - 1].is_whitespace() {
                s.end -= 1;
            }
            (s.start < s.end).then_some(s)
        })
        .collect()
}

/// Character ranges of the whitespace-separated words of `text`.
pub fn word_bounds(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        n = i + 1;
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, n));
    }
    out
}

/// A vocabulary holding every character of `alphabet` as its own token, a
/// few multi-character tokens, bare and padded markers, and EOS last.
pub fn char_vocab(alphabet: &[char], extra: &[&str], cfg: &MarkerConfig) -> Vocab {
    let mut pieces: Vec<Vec<u8>> = alphabet.iter().map(|c| c.to_string().into_bytes()).collect();
    pieces.extend(extra.iter().map(|s| s.as_bytes().to_vec()));
    pieces.sort();
    pieces.dedup();
    let mut entries: std::collections::BTreeMap<TokenId, Vec<u8>> =
        pieces.into_iter().enumerate().map(|(i, b)| (i as TokenId, b)).collect();
    let mut id = entries.len() as TokenId;
    let mut add = |bytes: String, entries: &mut std::collections::BTreeMap<TokenId, Vec<u8>>| {
        entries.insert(id, bytes.into_bytes());
        id += 1;
        id - 1
    };
    let start = [add(cfg.start_marker.clone(), &mut entries), add(format!(" {}", cfg.start_marker), &mut entries)];
    let end = [add(cfg.end_marker.clone(), &mut entries), add(format!(" {}", cfg.end_marker), &mut entries)];
    let special = SpecialTokens {
        start_marker_ids: start.into_iter().collect(),
        end_marker_ids: end.into_iter().collect(),
        eos_id: id,
    };
    Vocab::new(entries, special, cfg).expect("generated vocab is valid")
}
