mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::oracle::{all_strings, check_engine, toy_vocab};
use spanmark_core::constraint::{ConstraintEngine, SpecialTokens, TokenId, Vocab};
use spanmark_core::MarkerConfig;

fn engine(cfg: MarkerConfig) -> ConstraintEngine {
    ConstraintEngine::new(toy_vocab(&cfg), cfg).unwrap()
}

#[test]
fn toy_vocab_short_targets_padded() {
    let e = engine(MarkerConfig::default());
    for t in all_strings(&['a', ' ', 'é'], 5) {
        check_engine(&e, &t).unwrap();
    }
}

#[test]
fn toy_vocab_short_targets_unpadded() {
    let e = engine(MarkerConfig::unpadded());
    for t in all_strings(&['a', ' ', 'é'], 5) {
        check_engine(&e, &t).unwrap();
    }
}

/// Text made of marker characters exercises the clean-rendering rule.
#[test]
fn marker_like_text() {
    for cfg in [MarkerConfig::default(), MarkerConfig::unpadded()] {
        let entries: BTreeMap<TokenId, Vec<u8>> = [
            (0, b"a".to_vec()),
            (1, b">".to_vec()),
            (2, b"<".to_vec()),
            (3, b" ".to_vec()),
            (4, b">>".to_vec()),
            (5, b"<<".to_vec()),
            (6, b" >>".to_vec()),
            (7, b" <<".to_vec()),
            (8, b"a>".to_vec()),
        ]
        .into();
        let special = SpecialTokens {
            start_marker_ids: BTreeSet::from([4, 6]),
            end_marker_ids: BTreeSet::from([5, 7]),
            eos_id: 9,
        };
        let e = ConstraintEngine::new(Vocab::new(entries, special, &cfg).unwrap(), cfg).unwrap();
        for t in all_strings(&['a', '>', '<', ' '], 5) {
            check_engine(&e, &t).unwrap();
        }
    }
}

#[test]
fn alternate_markers() {
    let cfg = MarkerConfig::new("[[", "]", true).unwrap();
    let entries: BTreeMap<TokenId, Vec<u8>> = [
        (0, b"x".to_vec()),
        (1, b"]".to_vec()),
        (2, b"[".to_vec()),
        (3, b" ".to_vec()),
        (4, b"[[".to_vec()),
        (5, b" ]".to_vec()),
    ]
    .into();
    let special = SpecialTokens { start_marker_ids: BTreeSet::from([4]), end_marker_ids: BTreeSet::from([1, 5]), eos_id: 6 };
    let e = ConstraintEngine::new(Vocab::new(entries, special, &cfg).unwrap(), cfg).unwrap();
    for t in all_strings(&['x', '[', ' '], 5) {
        check_engine(&e, &t).unwrap();
    }
}
