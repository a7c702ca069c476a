use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Corpus;

/// Mean and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn of(values: &[usize]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let total: usize = values.iter().sum();
        let mean = total as f64 / n;
        let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        Self { mean, sd: var.sqrt() }
    }
}

/// Descriptive statistics of a corpus, in the shape of a dataset summary table.
///
/// Characters are Unicode scalars of the utterance text (speaker prefixes
/// excluded); words are maximal runs of non-whitespace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n_dialogues: usize,
    pub n_messages: usize,
    pub n_mentions: usize,
    pub n_chars: usize,
    pub n_words: usize,
    pub pct_messages_with_mention: f64,
    pub pct_messages_with_multiple: f64,
    pub chars_in_mentions: usize,
    pub pct_chars_in_mentions: f64,
    pub words_in_mentions: usize,
    pub pct_words_in_mentions: f64,
    pub chars_per_message: MeanSd,
    pub chars_per_mention: MeanSd,
    pub words_per_message: MeanSd,
    pub words_per_mention: MeanSd,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub(crate) fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

pub fn compute_stats(corpus: &Corpus) -> StatsReport {
    let mut msg_chars = Vec::new();
    let mut msg_words = Vec::new();
    let mut men_chars = Vec::new();
    let mut men_words = Vec::new();
    let mut with_mention = 0;
    let mut with_multiple = 0;

    for (_, u) in corpus.utterances() {
        msg_chars.push(u.char_len());
        msg_words.push(word_count(&u.text));
        match u.mentions.len() {
            0 => {}
            1 => with_mention += 1,
            _ => {
                with_mention += 1;
                with_multiple += 1;
            }
        }
        for m in &u.mentions {
            men_chars.push(m.len());
            men_words.push(word_count(m.slice(&u.text)));
        }
    }

    let n_messages = msg_chars.len();
    let n_chars = msg_chars.iter().sum();
    let n_words = msg_words.iter().sum();
    let chars_in_mentions = men_chars.iter().sum();
    let words_in_mentions = men_words.iter().sum();

    StatsReport {
        n_dialogues: corpus.dialogues.len(),
        n_messages,
        n_mentions: men_chars.len(),
        n_chars,
        n_words,
        pct_messages_with_mention: pct(with_mention, n_messages),
        pct_messages_with_multiple: pct(with_multiple, n_messages),
        chars_in_mentions,
        pct_chars_in_mentions: pct(chars_in_mentions, n_chars),
        words_in_mentions,
        pct_words_in_mentions: pct(words_in_mentions, n_words),
        chars_per_message: MeanSd::of(&msg_chars),
        chars_per_mention: MeanSd::of(&men_chars),
        words_per_message: MeanSd::of(&msg_words),
        words_per_mention: MeanSd::of(&men_words),
    }
}

/// Round half away from zero to two decimals.
pub fn round2(x: f64) -> f64 {
    // The nudge keeps exact halves such as 60.325 from falling to 60.32
    // through binary representation error.
    let scaled = x * 100.0;
    (scaled + scaled.signum() * 1e-7).round() / 100.0
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl StatsReport {
    /// Rows of `(label, formatted value)` in the conventional table order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let p = |x: f64| format!("{:.2}%", round2(x));
        let m = |x: MeanSd| format!("{:.2} ({:.2})", round2(x.mean), round2(x.sd));
        vec![
            ("# Dialogues", thousands(self.n_dialogues)),
            ("# Messages", thousands(self.n_messages)),
            ("# Mentions", thousands(self.n_mentions)),
            ("# Characters", thousands(self.n_chars)),
            ("# Words", thousands(self.n_words)),
            ("% Messages with mention", p(self.pct_messages_with_mention)),
            ("% Messages with > 1 mention", p(self.pct_messages_with_multiple)),
            ("# Characters in mentions", thousands(self.chars_in_mentions)),
            ("% Characters in mentions", p(self.pct_chars_in_mentions)),
            ("# Words in mentions", thousands(self.words_in_mentions)),
            ("% Words in mentions", p(self.pct_words_in_mentions)),
            ("Mean characters per message", m(self.chars_per_message)),
            ("Mean characters per mention", m(self.chars_per_mention)),
            ("Mean words per message", m(self.words_per_message)),
            ("Mean words per mention", m(self.words_per_mention)),
        ]
    }

    /// Aligned plain-text table with one column per named report.
    pub fn table(columns: &[(&str, &StatsReport)]) -> String {
        let rows: Vec<_> = columns.iter().map(|(_, r)| r.rows()).collect();
        let labels: Vec<&str> = match rows.first() {
            Some(r) => r.iter().map(|(l, _)| *l).collect(),
            None => return String::new(),
        };
        let label_w = labels.iter().map(|l| l.len()).max().unwrap_or(0);
        let col_w: Vec<usize> = columns
            .iter()
            .zip(&rows)
            .map(|((name, _), r)| r.iter().map(|(_, v)| v.len()).chain([name.len()]).max().unwrap())
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:label_w$}", "");
        for ((name, _), w) in columns.iter().zip(&col_w) {
            let _ = write!(out, " | {name:>w$}");
        }
        out.push('\n');
        for (i, label) in labels.iter().enumerate() {
            let _ = write!(out, "{label:label_w$}");
            for (r, w) in rows.iter().zip(&col_w) {
                let _ = write!(out, " | {:>w$}", r[i].1);
            }
            out.push('\n');
        }
        out
    }
}
