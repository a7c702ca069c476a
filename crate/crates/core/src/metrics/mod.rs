//! Span-level evaluation: exact-match precision/recall/F1, character-level
//! Jaccard under an optimal gold/prediction assignment, and a breakdown of
//! error types.
//!
//! All scores are micro-averaged over utterances. When neither side has a
//! single span, every score is 1; any other empty ratio is 0.

mod assignment;
mod predictions;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonl::JsonlError;
use crate::span::MentionSpan;

pub use assignment::optimal_assignment;
pub use predictions::{load_predictions, save_predictions, Prediction, PredictionRecord, PredictionSet, UtteranceKey};

use predictions::scored;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gold and predictions cover different utterances ({} only in gold, {} only in predictions{})",
        .missing.len(), .extra.len(), first_key(.missing, .extra))]
    KeyMismatch { missing: Vec<UtteranceKey>, extra: Vec<UtteranceKey> },
    #[error("utterance ({0}, {1}) appears twice")]
    DuplicateKey(String, usize),
    #[error("utterance ({0}, {1}) is not in the corpus")]
    UnknownUtterance(String, usize),
    #[error("utterance ({dialogue_id}, {index}): span {span} is empty, out of bounds, overlapping or out of order")]
    InvalidSpan { dialogue_id: String, index: usize, span: MentionSpan },
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn first_key(missing: &[UtteranceKey], extra: &[UtteranceKey]) -> String {
    match missing.first().or(extra.first()) {
        Some((d, i)) => format!(", e.g. ({d}, {i})"),
        None => String::new(),
    }
}

/// Gold and predicted spans for every utterance, in key order.
fn paired<'a>(
    gold: &'a PredictionSet,
    pred: &'a PredictionSet,
) -> Result<Vec<(&'a [MentionSpan], &'a [MentionSpan])>, MetricsError> {
    let g: BTreeSet<&UtteranceKey> = gold.keys().collect();
    let p: BTreeSet<&UtteranceKey> = pred.keys().collect();
    if g != p {
        return Err(MetricsError::KeyMismatch {
            missing: g.difference(&p).map(|&k| k.clone()).collect(),
            extra: p.difference(&g).map(|&k| k.clone()).collect(),
        });
    }
    Ok(gold.iter().zip(pred.iter()).map(|((_, a), (_, b))| (scored(a), scored(b))).collect())
}

fn ratio(num: f64, den: f64, nothing_anywhere: bool) -> f64 {
    if den > 0.0 {
        num / den
    } else if nothing_anywhere {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn exact_counts(pairs: &[(&[MentionSpan], &[MentionSpan])]) -> ExactScores {
    let (mut tp, mut n_gold, mut n_pred) = (0, 0, 0);
    for (g, p) in pairs {
        let gs: BTreeSet<_> = g.iter().collect();
        let ps: BTreeSet<_> = p.iter().collect();
        tp += gs.intersection(&ps).count();
        n_gold += gs.len();
        n_pred += ps.len();
    }
    let empty = n_gold == 0 && n_pred == 0;
    let precision = ratio(tp as f64, n_pred as f64, empty);
    let recall = ratio(tp as f64, n_gold as f64, empty);
    ExactScores { precision, recall, f1: if empty { 1.0 } else { f1(precision, recall) }, tp, fp: n_pred - tp, fn_: n_gold - tp }
}

/// Exact-match precision, recall and F1: a predicted span counts only if a
/// gold span in the same utterance has the same boundaries.
pub fn exact_prf(gold: &PredictionSet, pred: &PredictionSet) -> Result<ExactScores, MetricsError> {
    Ok(exact_counts(&paired(gold, pred)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JaccardScores {
    /// Sum of pair scores over matched, unmatched gold and unmatched
    /// predicted spans of the whole corpus.
    pub jaccard: f64,
    /// Mean of the per-utterance scores over utterances with any span.
    pub jaccard_macro: f64,
    pub matched_pairs: usize,
    pub unmatched_gold: usize,
    pub unmatched_pred: usize,
}

/// Intersection over union of the character sets of two spans.
pub fn span_jaccard(a: &MentionSpan, b: &MentionSpan) -> f64 {
    let union = a.union(b);
    if union == 0 {
        0.0
    } else {
        a.intersection(b) as f64 / union as f64
    }
}

fn jaccard_counts(pairs: &[(&[MentionSpan], &[MentionSpan])]) -> JaccardScores {
    let (mut sum, mut matched, mut ug, mut up) = (0.0, 0, 0, 0);
    let (mut macro_sum, mut macro_n) = (0.0, 0);
    for (g, p) in pairs {
        let m = optimal_assignment(g, p);
        let contrib: f64 = m.iter().map(|&(i, j)| span_jaccard(&g[i], &p[j])).sum();
        let den = g.len() + p.len() - m.len();
        sum += contrib;
        matched += m.len();
        ug += g.len() - m.len();
        up += p.len() - m.len();
        if den > 0 {
            macro_sum += contrib / den as f64;
            macro_n += 1;
        }
    }
    let den = matched + ug + up;
    JaccardScores {
        jaccard: ratio(sum, den as f64, den == 0),
        jaccard_macro: ratio(macro_sum, macro_n as f64, macro_n == 0),
        matched_pairs: matched,
        unmatched_gold: ug,
        unmatched_pred: up,
    }
}

/// Character-level Jaccard under the per-utterance optimal assignment.
/// Unmatched spans on either side contribute 0.
pub fn jaccard_score(gold: &PredictionSet, pred: &PredictionSet) -> Result<JaccardScores, MetricsError> {
    Ok(jaccard_counts(&paired(gold, pred)?))
}

/// Counts of error clusters. Gold and predicted spans are grouped into the
/// connected pieces of their overlap graph, and each piece gets one label:
/// `split` if some gold span overlaps two or more predictions, else `merge`
/// if some prediction overlaps two or more gold spans, else `exact` or
/// `boundary_partial` for a single overlapping pair. A lone gold span is
/// `missed` and a lone prediction `spurious`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub exact: usize,
    pub boundary_partial: usize,
    pub split: usize,
    pub merge: usize,
    pub spurious: usize,
    pub missed: usize,
}

impl ErrorBreakdown {
    fn add_utterance(&mut self, g: &[MentionSpan], p: &[MentionSpan]) {
        let (ng, np) = (g.len(), p.len());
        let mut seen = vec![false; ng + np];
        for start in 0..ng + np {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let (mut golds, mut preds) = (Vec::new(), Vec::new());
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                let (here, others, offset) = if x < ng { (&g[x], p, ng) } else { (&p[x - ng], g, 0) };
                if x < ng {
                    golds.push(x);
                } else {
                    preds.push(x - ng);
                }
                for (k, o) in others.iter().enumerate() {
                    if here.overlaps(o) && !seen[offset + k] {
                        seen[offset + k] = true;
                        stack.push(offset + k);
                    }
                }
            }
            let degree = |s: &MentionSpan, others: &[MentionSpan]| others.iter().filter(|o| s.overlaps(o)).count();
            match (golds.len(), preds.len()) {
                (_, 0) => self.missed += golds.len(),
                (0, _) => self.spurious += preds.len(),
                (1, 1) if g[golds[0]] == p[preds[0]] => self.exact += 1,
                (1, 1) => self.boundary_partial += 1,
                _ if golds.iter().any(|&i| degree(&g[i], p) >= 2) => self.split += 1,
                _ => self.merge += 1,
            }
        }
    }
}

pub fn categorize_errors(gold: &PredictionSet, pred: &PredictionSet) -> Result<ErrorBreakdown, MetricsError> {
    let mut out = ErrorBreakdown::default();
    for (g, p) in paired(gold, pred)? {
        out.add_utterance(g, p);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub utterances: usize,
    pub gold_spans: usize,
    pub pred_spans: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub matched_pairs: usize,
    pub unmatched_gold: usize,
    pub unmatched_pred: usize,
    pub parse_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub jaccard: f64,
    pub jaccard_macro: f64,
    pub counts: EvalCounts,
    pub error_breakdown: ErrorBreakdown,
}

/// Every metric in one pass.
pub fn evaluate(gold: &PredictionSet, pred: &PredictionSet) -> Result<EvalReport, MetricsError> {
    let pairs = paired(gold, pred)?;
    let e = exact_counts(&pairs);
    let j = jaccard_counts(&pairs);
    let mut errors = ErrorBreakdown::default();
    for (g, p) in &pairs {
        errors.add_utterance(g, p);
    }
    Ok(EvalReport {
        precision: e.precision,
        recall: e.recall,
        f1: e.f1,
        jaccard: j.jaccard,
        jaccard_macro: j.jaccard_macro,
        counts: EvalCounts {
            utterances: pairs.len(),
            gold_spans: e.tp + e.fn_,
            pred_spans: e.tp + e.fp,
            tp: e.tp,
            fp: e.fp,
            fn_: e.fn_,
            matched_pairs: j.matched_pairs,
            unmatched_gold: j.unmatched_gold,
            unmatched_pred: j.unmatched_pred,
            parse_failures: pred.parse_failures(),
        },
        error_breakdown: errors,
    })
}

impl EvalReport {
    /// Plain-text table: P, R, F1 and J rows, then counts.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let rows = [
            ("P", self.precision),
            ("R", self.recall),
            ("F1", self.f1),
            ("J", self.jaccard),
            ("J (macro)", self.jaccard_macro),
        ];
        let _ = writeln!(out, "{:<10} {:>6}", "metric", "score");
        for (name, v) in rows {
            let _ = writeln!(out, "{name:<10} {v:>6.3}");
        }
        let c = &self.counts;
        let e = &self.error_breakdown;
        let _ = writeln!(out);
        let _ = writeln!(out, "utterances {}  gold spans {}  predicted spans {}", c.utterances, c.gold_spans, c.pred_spans);
        let _ = writeln!(out, "tp {}  fp {}  fn {}", c.tp, c.fp, c.fn_);
        let _ = writeln!(
            out,
            "matched {}  unmatched gold {}  unmatched predicted {}  parse failures {}",
            c.matched_pairs, c.unmatched_gold, c.unmatched_pred, c.parse_failures
        );
        let _ = writeln!(
            out,
            "exact {}  boundary_partial {}  split {}  merge {}  spurious {}  missed {}",
            e.exact, e.boundary_partial, e.split, e.merge, e.spurious, e.missed
        );
        out
    }
}
