//! Byte-level automaton over the clean renderings of one target.
//!
//! Nodes are `(pos, span, stage)`. `pos` counts target characters already
//! emitted. `span` is outside a mention, inside one with no content yet, or
//! inside with content. Within a position the stages run
//! `Open -> Mid -> Content`: an end marker leaves `Open`, a start marker
//! leaves `Mid`, and the next character leaves `Content`. Stages advance
//! freely, so every node has at most one labelled edge.
//!
//! Clean output is enforced with a matcher over both marker strings: a
//! marker occurrence may only complete on the last byte of an inserted
//! marker. The matcher state depends only on the bytes emitted, so it is
//! shared by every path a session is still tracking.

use crate::annotation::MarkerConfig;

const OUTSIDE: usize = 0;
const INSIDE_EMPTY: usize = 1;
const INSIDE: usize = 2;

const OPEN: usize = 0;
const MID: usize = 1;
const CONTENT: usize = 2;

/// Aho-Corasick automaton over the two marker strings, as a full DFA.
#[derive(Debug, Clone)]
pub(crate) struct MarkerDfa {
    next: Vec<[u32; 256]>,
    hit: Vec<bool>,
}

impl MarkerDfa {
    pub fn new(cfg: &MarkerConfig) -> Self {
        let patterns = [cfg.start_marker.as_bytes(), cfg.end_marker.as_bytes()];
        let mut next: Vec<[u32; 256]> = vec![[u32::MAX; 256]];
        let mut hit = vec![false];
        for p in patterns {
            let mut s = 0usize;
            for &b in p {
                if next[s][b as usize] == u32::MAX {
                    next.push([u32::MAX; 256]);
                    hit.push(false);
                    next[s][b as usize] = (next.len() - 1) as u32;
                }
                s = next[s][b as usize] as usize;
            }
            hit[s] = true;
        }

        let mut fail = vec![0usize; next.len()];
        let mut queue = std::collections::VecDeque::new();
        for b in 0..256 {
            match next[0][b] {
                u32::MAX => next[0][b] = 0,
                t => queue.push_back(t as usize),
            }
        }
        while let Some(s) = queue.pop_front() {
            hit[s] = hit[s] || hit[fail[s]];
            for b in 0..256 {
                let t = next[s][b];
                if t == u32::MAX {
                    next[s][b] = next[fail[s]][b];
                } else {
                    fail[t as usize] = next[fail[s]][b] as usize;
                    queue.push_back(t as usize);
                }
            }
        }
        Self { next, hit }
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    #[inline]
    pub fn step(&self, state: u32, byte: u8) -> u32 {
        self.next[state as usize][byte as usize]
    }

    /// True if some marker occurrence ends at the byte that led here.
    #[inline]
    pub fn hit(&self, state: u32) -> bool {
        self.hit[state as usize]
    }
}

/// Where an edge's label may legitimately complete a marker occurrence.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Label<'a> {
    pub bytes: &'a [u8],
    pub marker_end: Option<usize>,
    pub target: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct TargetAutomaton {
    n: usize,
    lock: usize,
    trim: bool,
    pad: bool,
    ws: Vec<bool>,
    /// Byte offset of each character in `text`, plus the total length.
    offsets: Vec<usize>,
    text: Vec<u8>,
    start_bare: Vec<u8>,
    start_pad: Vec<u8>,
    end_bare: Vec<u8>,
    end_pad: Vec<u8>,
    ac_states: usize,
    live: Vec<bool>,
}

impl TargetAutomaton {
    /// `lock` characters at the front of `target` are copied verbatim and
    /// can never be inside a mention.
    pub fn new(target: &str, lock: usize, cfg: &MarkerConfig, dfa: &MarkerDfa) -> Self {
        let chars: Vec<char> = target.chars().collect();
        let mut offsets: Vec<usize> = target.char_indices().map(|(i, _)| i).collect();
        offsets.push(target.len());
        let mut a = Self {
            n: chars.len(),
            lock: lock.min(chars.len()),
            trim: cfg.requires_trimmed(),
            pad: cfg.pad_with_space,
            ws: chars.iter().map(|c| c.is_whitespace()).collect(),
            offsets,
            text: target.as_bytes().to_vec(),
            start_bare: cfg.start_marker.as_bytes().to_vec(),
            start_pad: format!("{} ", cfg.start_marker).into_bytes(),
            end_bare: cfg.end_marker.as_bytes().to_vec(),
            end_pad: format!(" {}", cfg.end_marker).into_bytes(),
            ac_states: dfa.states(),
            live: Vec::new(),
        };
        a.live = vec![false; (a.n + 1) * 9 * a.ac_states];
        for pos in (0..=a.n).rev() {
            for stage in (OPEN..=CONTENT).rev() {
                for span in OUTSIDE..=INSIDE {
                    let node = Self::node(pos, span, stage);
                    for ac in 0..a.ac_states as u32 {
                        let v = a.is_accept(node)
                            || a.edge_live(node, 0, ac, dfa)
                            || (stage < CONTENT && a.is_live(node + 1, ac));
                        a.live[node as usize * a.ac_states + ac as usize] = v;
                    }
                }
            }
        }
        a
    }

    #[inline]
    fn node(pos: usize, span: usize, stage: usize) -> u32 {
        ((pos * 3 + span) * 3 + stage) as u32
    }

    #[inline]
    fn unpack(node: u32) -> (usize, usize, usize) {
        let n = node as usize;
        (n / 9, (n / 3) % 3, n % 3)
    }

    pub fn initial_node() -> u32 {
        Self::node(0, OUTSIDE, OPEN)
    }

    pub fn is_accept(&self, node: u32) -> bool {
        node == Self::node(self.n, OUTSIDE, CONTENT)
    }

    pub fn is_live(&self, node: u32, ac: u32) -> bool {
        self.live[node as usize * self.ac_states + ac as usize]
    }

    /// Target characters fully emitted on reaching `node`.
    pub fn pos(node: u32) -> usize {
        Self::unpack(node).0
    }

    pub fn in_span(node: u32) -> bool {
        Self::unpack(node).1 != OUTSIDE
    }

    pub fn label(&self, node: u32) -> Option<Label<'_>> {
        let (pos, span, stage) = Self::unpack(node);
        match stage {
            OPEN if span == INSIDE && pos > self.lock && (!self.trim || !self.ws[pos - 1]) => {
                let bytes: &[u8] = if self.pad && (pos == self.n || self.ws[pos]) {
                    &self.end_pad
                } else {
                    &self.end_bare
                };
                Some(Label {
                    bytes,
                    marker_end: Some(bytes.len() - 1),
                    target: Self::node(pos, OUTSIDE, MID),
                })
            }
            MID if span == OUTSIDE && pos >= self.lock && pos < self.n && (!self.trim || !self.ws[pos]) => {
                let bytes: &[u8] = if self.pad && (pos == self.lock || self.ws[pos - 1]) {
                    &self.start_pad
                } else {
                    &self.start_bare
                };
                Some(Label {
                    bytes,
                    marker_end: Some(self.start_bare.len() - 1),
                    target: Self::node(pos, INSIDE_EMPTY, CONTENT),
                })
            }
            CONTENT if pos < self.n => Some(Label {
                bytes: &self.text[self.offsets[pos]..self.offsets[pos + 1]],
                marker_end: None,
                target: Self::node(pos + 1, if span == OUTSIDE { OUTSIDE } else { INSIDE }, OPEN),
            }),
            _ => None,
        }
    }

    /// Can the edge leaving `node`, with `off` label bytes already emitted,
    /// be finished cleanly and lead somewhere live?
    pub fn edge_live(&self, node: u32, off: usize, mut ac: u32, dfa: &MarkerDfa) -> bool {
        let Some(l) = self.label(node) else { return false };
        for (i, &b) in l.bytes.iter().enumerate().skip(off) {
            ac = dfa.step(ac, b);
            if dfa.hit(ac) && l.marker_end != Some(i) {
                return false;
            }
        }
        self.is_live(l.target, ac)
    }

    /// Stages reachable from `node` without emitting anything.
    pub fn closure(node: u32) -> impl Iterator<Item = u32> {
        let (pos, span, stage) = Self::unpack(node);
        (stage..=CONTENT).map(move |st| Self::node(pos, span, st))
    }
}
