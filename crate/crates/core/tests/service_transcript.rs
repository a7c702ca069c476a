mod common;

use std::collections::HashMap;

use common::oracle::{prefix_mask, toy_vocab};
use serde_json::Value;
use spanmark_core::constraint::serve;
use spanmark_core::{ConstraintEngine, MarkerConfig, SessionService};

const TRANSCRIPT: &str = include_str!("../../../fixtures/mask_transcript.jsonl");

fn lines() -> Vec<(String, String)> {
    TRANSCRIPT
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            (v["send"].as_str().unwrap().to_owned(), v["expect"].as_str().unwrap().to_owned())
        })
        .collect()
}

fn service() -> SessionService {
    let cfg = MarkerConfig::default();
    SessionService::new(ConstraintEngine::new(toy_vocab(&cfg), cfg).unwrap())
}

#[test]
fn replay_is_byte_exact() {
    let s = service();
    for (send, expect) in lines() {
        assert_eq!(s.handle_line(&send), expect, "after {send}");
    }
    assert_eq!(s.open_sessions(), 0);
}

#[test]
fn replay_over_a_stream() {
    let (sends, expects): (Vec<String>, Vec<String>) = lines().into_iter().unzip();
    let input = sends.join("\n") + "\n";
    let mut out = Vec::new();
    serve(&service(), input.as_bytes(), &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), expects.join("\n") + "\n");
}

/// Every mask in the transcript equals the brute-force one.
#[test]
fn masks_match_oracle() {
    let cfg = MarkerConfig::default();
    let vocab = toy_vocab(&cfg);
    // session id -> (prefix, target, emitted bytes)
    let mut sessions: HashMap<u64, (String, String, Vec<u8>)> = HashMap::new();
    let mut checked = 0;
    for (send, expect) in lines() {
        let (Ok(req), Ok(resp)) = (serde_json::from_str::<Value>(&send), serde_json::from_str::<Value>(&expect)) else {
            continue;
        };
        match req["op"].as_str() {
            Some("open") => {
                if let Some(id) = resp["session"].as_u64() {
                    let prefix = req["prefix"].as_str().unwrap_or("").to_owned();
                    sessions.insert(id, (prefix, req["target"].as_str().unwrap().to_owned(), Vec::new()));
                }
            }
            Some("advance") if resp["ok"] == true && resp["done"] == false => {
                let s = sessions.get_mut(&req["session"].as_u64().unwrap()).unwrap();
                s.2.extend_from_slice(vocab.bytes(req["token"].as_u64().unwrap() as u32).unwrap());
            }
            Some("mask") if resp.get("allowed").is_some() => {
                let (prefix, target, emitted) = &sessions[&req["session"].as_u64().unwrap()];
                let got: Vec<u32> = serde_json::from_value(resp["allowed"].clone()).unwrap();
                assert_eq!(got, prefix_mask(prefix, target, emitted, &vocab, &cfg), "{send}");
                checked += 1;
            }
            _ => {}
        }
    }
    assert_eq!(checked, 9);
}
