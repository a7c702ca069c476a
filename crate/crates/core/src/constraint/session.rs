use std::sync::Arc;

use super::automaton::{MarkerDfa, TargetAutomaton};
use super::vocab::{TokenId, Trie, Vocab};
use super::ConstraintError;
use crate::annotation::MarkerConfig;

#[derive(Debug)]
struct Shared {
    vocab: Vocab,
    markers: MarkerConfig,
    dfa: MarkerDfa,
}

/// A vocabulary bound to a marker configuration. Cheap to clone and safe to
/// share between threads; each decode gets its own [`Session`].
#[derive(Debug, Clone)]
pub struct ConstraintEngine {
    shared: Arc<Shared>,
}

impl ConstraintEngine {
    pub fn new(vocab: Vocab, markers: MarkerConfig) -> Result<Self, ConstraintError> {
        markers.check()?;
        let dfa = MarkerDfa::new(&markers);
        Ok(Self { shared: Arc::new(Shared { vocab, markers, dfa }) })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.shared.vocab
    }

    pub fn markers(&self) -> &MarkerConfig {
        &self.shared.markers
    }

    pub fn open(&self, target: &str) -> Result<Session, ConstraintError> {
        self.open_with_prefix("", target)
    }

    /// Session whose output must start with `prefix` verbatim (for example
    /// a speaker tag) followed by an annotated reproduction of `target`.
    pub fn open_with_prefix(&self, prefix: &str, target: &str) -> Result<Session, ConstraintError> {
        let full = format!("{prefix}{target}");
        if self.shared.markers.collides(&full) {
            return Err(ConstraintError::MarkerCollision);
        }
        let automaton = TargetAutomaton::new(&full, prefix.chars().count(), &self.shared.markers, &self.shared.dfa);
        let mut state = State::default();
        close(&automaton, &self.shared.dfa, TargetAutomaton::initial_node(), &mut state);
        if state.is_dead() {
            return Err(ConstraintError::MarkerCollision);
        }
        Ok(Session {
            shared: self.shared.clone(),
            automaton: Arc::new(automaton),
            target_len: full.chars().count(),
            state,
            emitted: Vec::new(),
            done: false,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct State {
    /// `(node, offset)`: partway through the label of the edge leaving `node`.
    cursors: Vec<(u32, u8)>,
    ac: u32,
    accepting: bool,
}

impl State {
    fn is_dead(&self) -> bool {
        self.cursors.is_empty() && !self.accepting
    }
}

fn close(a: &TargetAutomaton, dfa: &MarkerDfa, node: u32, out: &mut State) {
    for nd in TargetAutomaton::closure(node) {
        if a.is_accept(nd) {
            out.accepting = true;
        }
        if a.edge_live(nd, 0, out.ac, dfa) {
            out.cursors.push((nd, 0));
        }
    }
}

fn step(a: &TargetAutomaton, dfa: &MarkerDfa, st: &State, byte: u8) -> State {
    let ac = dfa.step(st.ac, byte);
    let hit = dfa.hit(ac);
    let mut out = State { cursors: Vec::new(), ac, accepting: false };
    for &(node, off) in &st.cursors {
        let label = a.label(node).expect("cursor sits on an edge");
        let off = off as usize;
        if label.bytes[off] != byte || (hit && label.marker_end != Some(off)) {
            continue;
        }
        if off + 1 < label.bytes.len() {
            out.cursors.push((node, off as u8 + 1));
        } else {
            close(a, dfa, label.target, &mut out);
        }
    }
    out.cursors.sort_unstable();
    out.cursors.dedup();
    out
}

/// One constrained decode. Single owner; not for concurrent use. Cloning
/// is cheap, which suits samplers that branch.
#[derive(Debug, Clone)]
pub struct Session {
    shared: Arc<Shared>,
    automaton: Arc<TargetAutomaton>,
    target_len: usize,
    state: State,
    emitted: Vec<u8>,
    done: bool,
}

impl Session {
    /// Sorted ids of every token that keeps the output a valid prefix.
    pub fn allowed_tokens(&self) -> Result<Vec<TokenId>, ConstraintError> {
        if self.done {
            return Err(ConstraintError::SessionDone);
        }
        let mut out = Vec::new();
        if self.state.accepting {
            out.push(self.shared.vocab.eos_id());
        }
        self.collect(Trie::ROOT, &self.state, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    fn collect(&self, node: u32, st: &State, out: &mut Vec<TokenId>) {
        let trie = self.shared.vocab.trie();
        let mut bytes: Vec<u8> = st
            .cursors
            .iter()
            .map(|&(n, off)| self.automaton.label(n).expect("cursor sits on an edge").bytes[off as usize])
            .collect();
        bytes.sort_unstable();
        bytes.dedup();
        for b in bytes {
            let Some(child) = trie.child(node, b) else { continue };
            let next = step(&self.automaton, &self.shared.dfa, st, b);
            if next.is_dead() {
                continue;
            }
            out.extend_from_slice(trie.tokens(child));
            self.collect(child, &next, out);
        }
    }

    /// Emit `token`. Returns whether the session is now done.
    pub fn advance(&mut self, token: TokenId) -> Result<bool, ConstraintError> {
        if self.done {
            return Err(ConstraintError::SessionDone);
        }
        if token == self.shared.vocab.eos_id() {
            if !self.state.accepting {
                return Err(ConstraintError::DisallowedToken(token));
            }
            self.done = true;
            return Ok(true);
        }
        let bytes = match self.shared.vocab.bytes(token) {
            Some(b) if !b.is_empty() => b,
            _ => return Err(ConstraintError::DisallowedToken(token)),
        };
        let mut st = self.state.clone();
        for &b in bytes {
            st = step(&self.automaton, &self.shared.dfa, &st, b);
            if st.is_dead() {
                return Err(ConstraintError::DisallowedToken(token));
            }
        }
        self.state = st;
        self.emitted.extend_from_slice(bytes);
        Ok(false)
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// True if end of sequence would be accepted now.
    pub fn is_complete(&self) -> bool {
        self.state.accepting
    }

    /// Emitted text up to the last complete character.
    pub fn decoded_string(&self) -> &str {
        match std::str::from_utf8(&self.emitted) {
            Ok(s) => s,
            Err(e) => std::str::from_utf8(&self.emitted[..e.valid_up_to()]).expect("valid prefix"),
        }
    }

    /// Trailing bytes of an unfinished character.
    pub fn pending_bytes(&self) -> &[u8] {
        &self.emitted[self.decoded_string().len()..]
    }

    pub fn emitted_bytes(&self) -> &[u8] {
        &self.emitted
    }

    /// Target characters (prefix included) reproduced so far. When the
    /// emitted bytes are still ambiguous, the smallest reading is reported.
    pub fn consumed(&self) -> usize {
        self.state.cursors.iter().map(|&(n, _)| TargetAutomaton::pos(n)).min().unwrap_or(self.target_len)
    }

    /// True if every reading of the output so far is inside a mention.
    pub fn in_span(&self) -> bool {
        !self.state.accepting
            && self.state.cursors.iter().all(|&(n, _)| TargetAutomaton::in_span(n))
            && !self.state.cursors.is_empty()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::annotation::parse;
    use crate::constraint::SpecialTokens;

    /// {"a","b"," ",">>","<<",EOS}
    fn toy(cfg: MarkerConfig) -> ConstraintEngine {
        let entries: BTreeMap<TokenId, Vec<u8>> = [
            (0, b"a".to_vec()),
            (1, b"b".to_vec()),
            (2, b" ".to_vec()),
            (3, b">>".to_vec()),
            (4, b"<<".to_vec()),
        ]
        .into();
        let special = SpecialTokens {
            start_marker_ids: BTreeSet::from([3]),
            end_marker_ids: BTreeSet::from([4]),
            eos_id: 5,
        };
        ConstraintEngine::new(Vocab::new(entries, special, &cfg).unwrap(), cfg).unwrap()
    }

    #[test]
    fn fresh_session_unpadded() {
        let e = toy(MarkerConfig::unpadded());
        let s = e.open("a b").unwrap();
        assert_eq!(s.consumed(), 0);
        assert_eq!(s.decoded_string(), "");
        assert_eq!(s.allowed_tokens().unwrap(), vec![0, 3]);
    }

    #[test]
    fn after_full_content_only_eos() {
        for cfg in [MarkerConfig::unpadded(), MarkerConfig::default()] {
            let e = toy(cfg);
            let mut s = e.open("a b").unwrap();
            for t in [0, 2, 1] {
                s.advance(t).unwrap();
            }
            assert_eq!(s.allowed_tokens().unwrap(), vec![5]);
        }
    }

    #[test]
    fn no_empty_span() {
        let e = toy(MarkerConfig::unpadded());
        let mut s = e.open("a b").unwrap();
        s.advance(3).unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![0]);
        assert!(s.in_span());

        let e = toy(MarkerConfig::default());
        let mut s = e.open("a b").unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![0, 3]);
        s.advance(3).unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![2]);
    }

    #[test]
    fn advance_errors() {
        let e = toy(MarkerConfig::unpadded());
        let mut s = e.open("a b").unwrap();
        s.advance(0).unwrap();
        assert_eq!(s.consumed(), 1);
        assert!(matches!(s.advance(4), Err(ConstraintError::DisallowedToken(4))));
        assert!(matches!(s.advance(99), Err(ConstraintError::DisallowedToken(99))));
        assert!(matches!(s.advance(5), Err(ConstraintError::DisallowedToken(5))));
        assert_eq!(s.decoded_string(), "a");
    }

    #[test]
    fn full_walks() {
        let e = toy(MarkerConfig::unpadded());
        let mut s = e.open("a b").unwrap();
        for t in [0, 2, 3, 1, 4] {
            assert!(!s.advance(t).unwrap());
        }
        assert!(s.advance(5).unwrap());
        assert_eq!(s.decoded_string(), "a >>b<<");
        assert_eq!(parse(s.decoded_string(), "a b", &MarkerConfig::unpadded()).unwrap().len(), 1);
        assert!(matches!(s.allowed_tokens(), Err(ConstraintError::SessionDone)));
        assert!(matches!(s.advance(0), Err(ConstraintError::SessionDone)));

        let cfg = MarkerConfig::default();
        let e = toy(cfg.clone());
        let mut s = e.open("a b").unwrap();
        for t in [0, 2, 3, 2, 1, 2, 4, 5] {
            s.advance(t).unwrap();
        }
        assert!(s.is_done());
        assert_eq!(s.decoded_string(), "a >> b <<");
        assert_eq!(
            parse(s.decoded_string(), "a b", &cfg).unwrap(),
            vec![crate::span::MentionSpan::new(2, 3)]
        );
    }

    #[test]
    fn empty_target_and_collision() {
        let e = toy(MarkerConfig::default());
        let s = e.open("").unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![5]);
        assert!(matches!(e.open("a >> b"), Err(ConstraintError::MarkerCollision)));
    }

    #[test]
    fn locked_prefix_takes_no_markers() {
        let e = toy(MarkerConfig::default());
        let mut s = e.open_with_prefix("b ", "a").unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![1]);
        s.advance(1).unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![2]);
        s.advance(2).unwrap();
        assert_eq!(s.allowed_tokens().unwrap(), vec![0, 3]);
        for t in [3, 2, 0, 2, 4, 5] {
            s.advance(t).unwrap();
        }
        assert_eq!(s.decoded_string(), "b >> a <<");
    }

    #[test]
    fn pending_multibyte() {
        let cfg = MarkerConfig::default();
        let entries: BTreeMap<TokenId, Vec<u8>> =
            [(0, vec![0xC3]), (1, vec![0xA9]), (2, b">>".to_vec()), (3, b"<<".to_vec())].into();
        let special =
            SpecialTokens { start_marker_ids: BTreeSet::from([2]), end_marker_ids: BTreeSet::from([3]), eos_id: 4 };
        let e = ConstraintEngine::new(Vocab::new(entries, special, &cfg).unwrap(), cfg).unwrap();
        let mut s = e.open("é").unwrap();
        s.advance(0).unwrap();
        assert_eq!(s.decoded_string(), "");
        assert_eq!(s.pending_bytes(), &[0xC3]);
        assert_eq!(s.consumed(), 0);
        s.advance(1).unwrap();
        assert_eq!(s.decoded_string(), "é");
        assert_eq!(s.allowed_tokens().unwrap(), vec![4]);
    }
}
