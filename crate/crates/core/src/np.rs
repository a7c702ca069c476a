//! Noun-phrase baseline: read bracketed constituency trees, take the
//! outermost NPs as mentions and drop participant pronouns.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::metrics::{Prediction, PredictionSet};
use crate::span::MentionSpan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unbalanced brackets at byte {position}")]
    UnbalancedBrackets { position: usize },
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("leaf {leaf:?} does not match the utterance at character {position}")]
    LeafAlignmentFailure { leaf: String, position: usize },
}

impl TreeError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnbalancedBrackets { .. } => "UnbalancedBrackets",
            Self::Malformed(_) => "MalformedTree",
            Self::LeafAlignmentFailure { .. } => "LeafAlignmentFailure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    Node { label: String, children: Vec<ParseTree> },
    /// Utterance text under the leaf and its character offsets.
    Leaf { text: String, start: usize, end: usize },
}

impl ParseTree {
    pub fn label(&self) -> Option<&str> {
        match self {
            Self::Node { label, .. } => Some(label),
            Self::Leaf { .. } => None,
        }
    }

    /// Character extent of the leaves below this node.
    pub fn span(&self) -> Option<MentionSpan> {
        match self {
            Self::Leaf { start, end, .. } => Some(MentionSpan::new(*start, *end)),
            Self::Node { children, .. } => {
                let first = children.iter().find_map(ParseTree::span)?;
                let last = children.iter().rev().find_map(ParseTree::span)?;
                Some(MentionSpan::new(first.start, last.end))
            }
        }
    }

    pub fn leaves(&self) -> Vec<&ParseTree> {
        match self {
            Self::Leaf { .. } => vec![self],
            Self::Node { children, .. } => children.iter().flat_map(ParseTree::leaves).collect(),
        }
    }
}

#[derive(Debug)]
enum Raw {
    Node(String, Vec<Raw>),
    Atom(String),
}

fn lex(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((st, &s[st..i]));
            }
            if !c.is_whitespace() {
                out.push((i, &s[i..i + 1]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    out
}

fn read_raw(bracketed: &str) -> Result<Raw, TreeError> {
    let toks = lex(bracketed);
    let mut stack: Vec<(String, Vec<Raw>)> = Vec::new();
    let mut done: Option<Raw> = None;
    let mut i = 0;
    while i < toks.len() {
        let (pos, t) = toks[i];
        if done.is_some() {
            if t == ")" {
                return Err(TreeError::UnbalancedBrackets { position: pos });
            }
            return Err(TreeError::Malformed(format!("content after the tree at byte {pos}")));
        }
        match t {
            "(" => {
                let label = match toks.get(i + 1) {
                    Some((_, l)) if *l != "(" && *l != ")" => {
                        i += 1;
                        l.to_string()
                    }
                    _ => String::new(),
                };
                stack.push((label, Vec::new()));
            }
            ")" => {
                let (label, children) = stack.pop().ok_or(TreeError::UnbalancedBrackets { position: pos })?;
                let node = Raw::Node(label, children);
                match stack.last_mut() {
                    Some((_, siblings)) => siblings.push(node),
                    None => done = Some(node),
                }
            }
            atom => match stack.last_mut() {
                Some((_, children)) => children.push(Raw::Atom(atom.to_owned())),
                None => return Err(TreeError::Malformed(format!("leaf {atom:?} outside brackets"))),
            },
        }
        i += 1;
    }
    if !stack.is_empty() {
        return Err(TreeError::UnbalancedBrackets { position: bracketed.len() });
    }
    done.ok_or_else(|| TreeError::Malformed("empty tree".into()))
}

/// Raw-text forms a parser-normalized leaf may stand for.
fn leaf_forms(leaf: &str) -> Vec<&str> {
    let alt = match leaf {
        "-LRB-" => Some("("),
        "-RRB-" => Some(")"),
        "-LCB-" => Some("{"),
        "-RCB-" => Some("}"),
        "-LSB-" => Some("["),
        "-RSB-" => Some("]"),
        "``" | "''" => Some("\""),
        _ => None,
    };
    alt.into_iter().chain([leaf]).collect()
}

/// Parse a Penn-Treebank-style bracketed tree and align its leaves to
/// `utterance` left to right, skipping whitespace between leaves.
pub fn parse_ptb(bracketed: &str, utterance: &str) -> Result<ParseTree, TreeError> {
    let raw = read_raw(bracketed)?;
    let chars: Vec<char> = utterance.chars().collect();
    let mut pos = 0;

    fn align(raw: Raw, chars: &[char], pos: &mut usize) -> Result<ParseTree, TreeError> {
        match raw {
            Raw::Node(label, children) => {
                if children.is_empty() {
                    return Err(TreeError::Malformed(format!("constituent {label:?} has no children")));
                }
                let children = children.into_iter().map(|c| align(c, chars, pos)).collect::<Result<_, _>>()?;
                Ok(ParseTree::Node { label, children })
            }
            Raw::Atom(leaf) => {
                while *pos < chars.len() && chars[*pos].is_whitespace() {
                    *pos += 1;
                }
                for form in leaf_forms(&leaf) {
                    let len = form.chars().count();
                    if *pos + len <= chars.len() && form.chars().eq(chars[*pos..*pos + len].iter().copied()) {
                        let start = *pos;
                        *pos += len;
                        return Ok(ParseTree::Leaf { text: form.to_owned(), start, end: *pos });
                    }
                }
                Err(TreeError::LeafAlignmentFailure { leaf, position: *pos })
            }
        }
    }

    let tree = align(raw, &chars, &mut pos)?;
    if let Some(extra) = chars[pos..].iter().position(|c| !c.is_whitespace()) {
        return Err(TreeError::LeafAlignmentFailure { leaf: String::new(), position: pos + extra });
    }
    Ok(tree)
}

fn is_np(label: &str) -> bool {
    label == "NP" || label.starts_with("NP-") || label.starts_with("NP=")
}

/// Spans of NP constituents with no NP ancestor, left to right.
pub fn extract_maximal_nps(tree: &ParseTree) -> Vec<MentionSpan> {
    fn go(t: &ParseTree, out: &mut Vec<MentionSpan>) {
        if let ParseTree::Node { label, children } = t {
            if is_np(label) {
                out.extend(t.span());
            } else {
                children.iter().for_each(|c| go(c, out));
            }
        }
    }
    let mut out = Vec::new();
    go(tree, &mut out);
    out
}

/// First- and second-person forms.
pub fn default_stoplist() -> BTreeSet<String> {
    ["i", "you", "me", "we", "us", "my", "your", "our", "mine", "yours", "ours"].map(String::from).into()
}

/// Drop spans whose text, trimmed and lowercased, is in `stoplist`.
pub fn filter_pronouns(spans: &[MentionSpan], utterance: &str, stoplist: &BTreeSet<String>) -> Vec<MentionSpan> {
    spans
        .iter()
        .filter(|s| !stoplist.contains(&s.slice(utterance).trim().to_lowercase()))
        .copied()
        .collect()
}

/// One line of a trees file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub dialogue_id: String,
    pub index: usize,
    pub tree: String,
}

/// Baseline predictions for every utterance of `corpus`. An utterance with
/// no tree, or whose tree cannot be read, gets no spans and a parse error.
pub fn np_baseline(corpus: &Corpus, trees: &[TreeRecord], stoplist: &BTreeSet<String>) -> PredictionSet {
    let by_key: HashMap<(&str, usize), &str> =
        trees.iter().map(|t| ((t.dialogue_id.as_str(), t.index), t.tree.as_str())).collect();
    let mut out = PredictionSet::new();
    for (d, u) in corpus.utterances() {
        let prediction = match by_key.get(&(d.dialogue_id.as_str(), u.index)) {
            None => Prediction { spans: Vec::new(), parse_error: Some("MissingTree".into()) },
            Some(tree) => match parse_ptb(tree, &u.text) {
                Ok(t) => Prediction {
                    spans: filter_pronouns(&extract_maximal_nps(&t), &u.text, stoplist),
                    parse_error: None,
                },
                Err(e) => Prediction { spans: Vec::new(), parse_error: Some(e.code().into()) },
            },
        };
        out.insert(d.dialogue_id.clone(), u.index, prediction);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: usize, b: usize) -> MentionSpan {
        MentionSpan::new(a, b)
    }

    #[test]
    fn dog_barks() {
        let t = parse_ptb("(S (NP (DT the) (NN dog)) (VP (VBZ barks)))", "the dog barks").unwrap();
        let ParseTree::Node { children, .. } = &t else { panic!() };
        assert_eq!(children[0].label(), Some("NP"));
        assert_eq!(children[0].span(), Some(s(0, 7)));
        assert_eq!(extract_maximal_nps(&t), vec![s(0, 7)]);
        assert_eq!(t.leaves().len(), 3);
    }

    #[test]
    fn single_np_and_no_np() {
        let t = parse_ptb("(NP (PRP it))", "it").unwrap();
        assert_eq!(extract_maximal_nps(&t), vec![s(0, 2)]);
        let t = parse_ptb("(ROOT (INTJ (UH yes)))", "yes").unwrap();
        assert!(extract_maximal_nps(&t).is_empty());
    }

    #[test]
    fn maximal_only() {
        let text = "the dog with a bone";
        let t = parse_ptb("(NP (NP (DT the) (NN dog)) (PP (IN with) (NP (DT a) (NN bone))))", text).unwrap();
        assert_eq!(extract_maximal_nps(&t), vec![s(0, 19)]);
        let t = parse_ptb("(S (NP-SBJ (DT the) (NN dog)) (VP (VBZ has) (NP=2 (DT a) (NN bone))))", "the dog has a bone")
            .unwrap();
        assert_eq!(extract_maximal_nps(&t), vec![s(0, 7), s(12, 18)]);
    }

    #[test]
    fn bracket_errors() {
        assert!(matches!(parse_ptb("((", ""), Err(TreeError::UnbalancedBrackets { .. })));
        assert!(matches!(parse_ptb("(NP (NN a)))", "a"), Err(TreeError::UnbalancedBrackets { .. })));
        assert!(matches!(parse_ptb("", ""), Err(TreeError::Malformed(_))));
        assert!(matches!(parse_ptb("(NP)", ""), Err(TreeError::Malformed(_))));
    }

    #[test]
    fn alignment() {
        let text = "a (big) \"dog\", isn't it";
        let t = parse_ptb(
            "( (S (NP (DT a) (-LRB- -LRB-) (JJ big) (-RRB- -RRB-) (`` ``) (NN dog) ('' '') (, ,)) (VP (VBZ is) (RB n't) (NP (PRP it)))))",
            text,
        )
        .unwrap();
        let leaves: Vec<(usize, usize)> = t
            .leaves()
            .iter()
            .map(|l| match l {
                ParseTree::Leaf { start, end, .. } => (*start, *end),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(leaves[1], (2, 3));
        assert_eq!(leaves[6], (12, 13));
        assert_eq!(extract_maximal_nps(&t), vec![s(0, 14), s(21, 23)]);
        assert!(matches!(parse_ptb("(NP (NN cat))", "dog"), Err(TreeError::LeafAlignmentFailure { .. })));
        assert!(matches!(parse_ptb("(NP (NN dog))", "dog food"), Err(TreeError::LeafAlignmentFailure { position: 4, .. })));
    }

    #[test]
    fn pronoun_filter() {
        let text = "I like the dog";
        let kept = filter_pronouns(&[s(0, 1), s(7, 14)], text, &default_stoplist());
        assert_eq!(kept, vec![s(7, 14)]);
        assert!(filter_pronouns(&[], text, &default_stoplist()).is_empty());
        assert!(filter_pronouns(&[s(0, 3)], "You there", &default_stoplist()).is_empty());
        assert_eq!(filter_pronouns(&kept, text, &default_stoplist()), kept);
    }
}
