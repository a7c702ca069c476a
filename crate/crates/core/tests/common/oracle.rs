//! Brute-force reference implementations used to check the fast paths.
#![allow(dead_code)]

use std::collections::BTreeSet;

use spanmark_core::constraint::{ConstraintEngine, TokenId, Vocab};
use spanmark_core::{render, MarkerConfig, MentionSpan};

/// Every set of disjoint nonempty spans over `n` characters, sorted.
pub fn all_span_sets(n: usize) -> Vec<Vec<MentionSpan>> {
    fn go(from: usize, n: usize, cur: &mut Vec<MentionSpan>, out: &mut Vec<Vec<MentionSpan>>) {
        out.push(cur.clone());
        for s in from..n {
            for e in s + 1..=n {
                cur.push(MentionSpan::new(s, e));
                go(e, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out
}

/// All clean annotated forms of `text`: the set A(text).
pub fn annotated_forms(text: &str, cfg: &MarkerConfig) -> BTreeSet<String> {
    all_span_sets(text.chars().count())
        .iter()
        .filter_map(|spans| render(text, spans, cfg).ok())
        .collect()
}

/// The 12-token vocabulary used by the exhaustive engine checks.
pub const TOY_VOCAB: &str = r#"{"entries":{
    "0":[97],"1":[32],"2":[195],"3":[169],"4":[195,169],"5":[97,32],"6":[32,97],
    "7":[62,62],"8":[32,62,62],"9":[60,60],"10":[32,60,60]},
  "special":{"start_marker_ids":[7,8],"end_marker_ids":[9,10],"eos_id":11}}"#;

pub fn toy_vocab(cfg: &MarkerConfig) -> Vocab {
    Vocab::from_json(TOY_VOCAB, cfg).expect("toy vocab loads")
}

/// Every string of length `0..=max_len` over `alphabet`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Byte trie holding every member of A(target); node ids stand for the
/// distinct prefixes.
struct FormTrie {
    children: Vec<Vec<(u8, usize)>>,
    terminal: Vec<bool>,
}

impl FormTrie {
    fn new<'a>(forms: impl IntoIterator<Item = &'a [u8]>) -> Self {
        let mut t = Self { children: vec![Vec::new()], terminal: vec![false] };
        for f in forms {
            let mut cur = 0;
            for &b in f {
                cur = match t.child(cur, b) {
                    Some(c) => c,
                    None => {
                        t.children.push(Vec::new());
                        t.terminal.push(false);
                        let id = t.children.len() - 1;
                        t.children[cur].push((b, id));
                        id
                    }
                };
            }
            t.terminal[cur] = true;
        }
        t
    }

    fn child(&self, node: usize, b: u8) -> Option<usize> {
        self.children[node].iter().find(|&&(c, _)| c == b).map(|&(_, id)| id)
    }

    fn walk(&self, node: usize, bytes: &[u8]) -> Option<usize> {
        bytes.iter().try_fold(node, |n, &b| self.child(n, b))
    }
}

fn brute_mask(forms: &FormTrie, node: usize, vocab: &Vocab) -> Vec<TokenId> {
    let mut out: Vec<TokenId> = vocab
        .entries()
        .filter(|(_, b)| !b.is_empty() && forms.walk(node, b).is_some())
        .map(|(id, _)| id)
        .collect();
    if forms.terminal[node] {
        out.push(vocab.eos_id());
    }
    out.sort_unstable();
    out
}

/// Walk every reachable decode state of `target` and compare the engine's
/// mask with the brute-force one. Also checks that each member of A(target)
/// that the vocabulary can spell is reached and accepted. Returns the
/// number of states compared.
pub fn check_engine(engine: &ConstraintEngine, target: &str) -> Result<usize, String> {
    let cfg = engine.markers();
    let vocab = engine.vocab();
    let forms: Vec<Vec<u8>> = annotated_forms(target, cfg).into_iter().map(String::into_bytes).collect();
    let trie = FormTrie::new(forms.iter().map(Vec::as_slice));

    let root = match engine.open(target) {
        Ok(s) => s,
        Err(_) if cfg.collides(target) => return Ok(0),
        Err(e) => return Err(format!("{target:?}: open failed: {e}")),
    };
    if cfg.collides(target) {
        return Err(format!("{target:?}: open should report a collision"));
    }

    let mut seen = vec![false; trie.terminal.len()];
    let mut accepted = vec![false; trie.terminal.len()];
    let mut stack = vec![(root, 0)];
    let mut states = 0;
    while let Some((s, node)) = stack.pop() {
        if std::mem::replace(&mut seen[node], true) {
            continue;
        }
        states += 1;
        let got = s.allowed_tokens().map_err(|e| e.to_string())?;
        let want = brute_mask(&trie, node, vocab);
        if got != want {
            return Err(format!(
                "{target:?} after {:?}: engine {got:?}, oracle {want:?}",
                String::from_utf8_lossy(s.emitted_bytes())
            ));
        }
        for t in got {
            let mut next = s.clone();
            next.advance(t).map_err(|e| format!("{target:?}: advance {t} failed: {e}"))?;
            if t == vocab.eos_id() {
                accepted[node] = true;
            } else {
                let bytes = vocab.bytes(t).expect("content token");
                stack.push((next, trie.walk(node, bytes).expect("allowed token stays in the trie")));
            }
        }
    }

    for f in &forms {
        if spellable(f, vocab) && !accepted[trie.walk(0, f).expect("form is in the trie")] {
            return Err(format!("{target:?}: form {:?} is never accepted", String::from_utf8_lossy(f)));
        }
    }
    Ok(states)
}

/// [`check_engine`] over many targets on all available cores. Returns the
/// total number of states compared, or the first failure.
pub fn check_engine_all(engine: &ConstraintEngine, targets: &[String]) -> Result<usize, String> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = targets.len().div_ceil(threads).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = targets
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|t| check_engine(engine, t)).sum::<Result<usize, String>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle thread panicked")).sum()
    })
}

/// Can `bytes` be written as a concatenation of vocabulary entries?
pub fn spellable(bytes: &[u8], vocab: &Vocab) -> bool {
    let mut ok = vec![false; bytes.len() + 1];
    ok[0] = true;
    for i in 0..bytes.len() {
        if !ok[i] {
            continue;
        }
        for (_, b) in vocab.entries() {
            if !b.is_empty() && bytes[i..].starts_with(b) {
                ok[i + b.len()] = true;
            }
        }
    }
    ok[bytes.len()]
}

/// Character overlap between two spans.
pub fn overlap(a: MentionSpan, b: MentionSpan) -> usize {
    a.end.min(b.end).saturating_sub(a.start.max(b.start))
}

/// Best total overlap over every partial one-to-one matching.
pub fn best_assignment_total(gold: &[MentionSpan], pred: &[MentionSpan]) -> usize {
    fn go(i: usize, gold: &[MentionSpan], pred: &[MentionSpan], used: &mut Vec<bool>) -> usize {
        if i == gold.len() {
            return 0;
        }
        let mut best = go(i + 1, gold, pred, used);
        for j in 0..pred.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(overlap(gold[i], pred[j]) + go(i + 1, gold, pred, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, gold, pred, &mut vec![false; pred.len()])
}

/// The positive-overlap pair sets of every matching that reaches the best total.
pub fn optimal_pair_sets(gold: &[MentionSpan], pred: &[MentionSpan]) -> BTreeSet<Vec<(usize, usize)>> {
    fn go(
        i: usize,
        gold: &[MentionSpan],
        pred: &[MentionSpan],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        total: usize,
        out: &mut Vec<(usize, Vec<(usize, usize)>)>,
    ) {
        if i == gold.len() {
            out.push((total, cur.clone()));
            return;
        }
        go(i + 1, gold, pred, used, cur, total, out);
        for j in 0..pred.len() {
            let o = overlap(gold[i], pred[j]);
            if !used[j] && o > 0 {
                used[j] = true;
                cur.push((i, j));
                go(i + 1, gold, pred, used, cur, total + o, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut all = Vec::new();
    go(0, gold, pred, &mut vec![false; pred.len()], &mut Vec::new(), 0, &mut all);
    let best = all.iter().map(|(t, _)| *t).max().unwrap_or(0);
    all.into_iter().filter(|(t, _)| *t == best).map(|(_, p)| p).collect()
}

/// Brute-force mask after `emitted` for a session opened on `target` behind
/// a verbatim `prefix`.
pub fn prefix_mask(prefix: &str, target: &str, emitted: &[u8], vocab: &Vocab, cfg: &MarkerConfig) -> Vec<TokenId> {
    let (sm, em) = (cfg.start_marker.as_bytes(), cfg.end_marker.as_bytes());
    let count = |s: &str| {
        let b = s.as_bytes();
        (0..b.len()).filter(|&i| b[i..].starts_with(sm) || b[i..].starts_with(em)).count()
    };
    let forms: Vec<String> = annotated_forms(target, cfg)
        .into_iter()
        .map(|f| format!("{prefix}{f}"))
        .filter(|f| count(f) == count(&f[prefix.len()..]))
        .collect();
    let extends = |bytes: &[u8]| {
        let mut cand = emitted.to_vec();
        cand.extend_from_slice(bytes);
        forms.iter().any(|f| f.as_bytes().starts_with(&cand))
    };
    let mut out: Vec<TokenId> = vocab.entries().filter(|(_, b)| !b.is_empty() && extends(b)).map(|(id, _)| id).collect();
    if forms.iter().any(|f| f.as_bytes() == emitted) {
        out.push(vocab.eos_id());
    }
    out.sort_unstable();
    out
}
