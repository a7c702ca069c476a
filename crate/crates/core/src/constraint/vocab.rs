use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use super::ConstraintError;
use crate::annotation::MarkerConfig;

pub type TokenId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialTokens {
    pub start_marker_ids: BTreeSet<TokenId>,
    pub end_marker_ids: BTreeSet<TokenId>,
    pub eos_id: TokenId,
}

/// Token id to byte-sequence table with a byte trie for prefix lookups.
#[derive(Debug, Clone)]
pub struct Vocab {
    entries: BTreeMap<TokenId, Vec<u8>>,
    special: SpecialTokens,
    trie: Trie,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    entries: RawEntries,
    special: SpecialTokens,
}

/// Entry map that rejects duplicate keys instead of keeping the last one.
struct RawEntries(Vec<(String, Vec<u8>)>);

impl<'de> Deserialize<'de> for RawEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawEntries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from token id to byte array")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<u8>>()? {
                    out.push((k, v));
                }
                Ok(RawEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

impl Serialize for RawEntries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(k, v)| (k, v)))
    }
}

impl Vocab {
    pub fn new(
        entries: BTreeMap<TokenId, Vec<u8>>,
        special: SpecialTokens,
        markers: &MarkerConfig,
    ) -> Result<Self, ConstraintError> {
        markers.check()?;
        if entries.contains_key(&special.eos_id) {
            return Err(ConstraintError::MalformedVocab(format!(
                "eos id {} must not have a byte expansion",
                special.eos_id
            )));
        }
        let check = |ids: &BTreeSet<TokenId>, marker: &str, role: &str| {
            if ids.is_empty() {
                return Err(ConstraintError::MarkerNotInVocab(format!("no {role} marker ids declared")));
            }
            for id in ids {
                let bytes = entries.get(id).ok_or_else(|| {
                    ConstraintError::MarkerNotInVocab(format!("{role} marker id {id} has no entry"))
                })?;
                let bare = bytes.strip_prefix(b" ").unwrap_or(bytes);
                if bare != marker.as_bytes() {
                    return Err(ConstraintError::MarkerNotInVocab(format!(
                        "{role} marker id {id} expands to {:?}, expected {marker:?}",
                        String::from_utf8_lossy(bytes)
                    )));
                }
            }
            Ok(())
        };
        check(&special.start_marker_ids, &markers.start_marker, "start")?;
        check(&special.end_marker_ids, &markers.end_marker, "end")?;

        let trie = Trie::build(entries.iter().map(|(&id, b)| (id, b.as_slice())));
        Ok(Self { entries, special, trie })
    }

    pub fn from_json(json: &str, markers: &MarkerConfig) -> Result<Self, ConstraintError> {
        let file: VocabFile =
            serde_json::from_str(json).map_err(|e| ConstraintError::MalformedVocab(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for (key, bytes) in file.entries.0 {
            let id: TokenId = key
                .parse()
                .map_err(|_| ConstraintError::MalformedVocab(format!("token id {key:?} is not an integer")))?;
            if entries.insert(id, bytes).is_some() {
                return Err(ConstraintError::MalformedVocab(format!("duplicate token id {id}")));
            }
        }
        Self::new(entries, file.special, markers)
    }

    pub fn to_json(&self) -> String {
        let file = VocabFile {
            entries: RawEntries(self.entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()),
            special: self.special.clone(),
        };
        serde_json::to_string(&file).expect("vocab serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn bytes(&self, id: TokenId) -> Option<&[u8]> {
        self.entries.get(&id).map(Vec::as_slice)
    }

    pub fn special(&self) -> &SpecialTokens {
        &self.special
    }

    pub fn eos_id(&self) -> TokenId {
        self.special.eos_id
    }

    /// Number of tokens including end-of-sequence.
    pub fn len(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> impl Iterator<Item = (TokenId, &[u8])> {
        self.entries.iter().map(|(&id, b)| (id, b.as_slice()))
    }

    pub(crate) fn trie(&self) -> &Trie {
        &self.trie
    }
}

pub fn load_vocab(path: impl AsRef<Path>, markers: &MarkerConfig) -> Result<Vocab, ConstraintError> {
    let path = path.as_ref();
    let json = fs::read_to_string(path)
        .map_err(|e| ConstraintError::MalformedVocab(format!("{}: {e}", path.display())))?;
    Vocab::from_json(&json, markers)
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    /// Sorted by byte.
    children: Vec<(u8, u32)>,
    tokens: Vec<TokenId>,
}

/// Byte trie over token expansions. Empty expansions are never inserted.
#[derive(Debug, Clone)]
pub(crate) struct Trie {
    nodes: Vec<TrieNode>,
}

impl Trie {
    pub const ROOT: u32 = 0;

    fn build<'a>(tokens: impl Iterator<Item = (TokenId, &'a [u8])>) -> Self {
        let mut nodes = vec![TrieNode::default()];
        for (id, bytes) in tokens {
            if bytes.is_empty() {
                continue;
            }
            let mut cur = 0usize;
            for &b in bytes {
                let next = match nodes[cur].children.binary_search_by_key(&b, |&(c, _)| c) {
                    Ok(i) => nodes[cur].children[i].1 as usize,
                    Err(i) => {
                        let idx = nodes.len();
                        nodes.push(TrieNode::default());
                        nodes[cur].children.insert(i, (b, idx as u32));
                        idx
                    }
                };
                cur = next;
            }
            nodes[cur].tokens.push(id);
        }
        Self { nodes }
    }

    pub fn child(&self, node: u32, byte: u8) -> Option<u32> {
        let children = &self.nodes[node as usize].children;
        children.binary_search_by_key(&byte, |&(c, _)| c).ok().map(|i| children[i].1)
    }

    pub fn tokens(&self, node: u32) -> &[TokenId] {
        &self.nodes[node as usize].tokens
    }
}
