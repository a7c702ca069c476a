//! Train/test partitions at the dialogue level.

use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

/// Image categories of the five-category corpus, in fold order.
pub const AGOS_CATEGORIES: [&str; 5] = ["cars", "dogs", "paintings", "pastries", "phones"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("dialogue {dialogue_id} has unknown category {category:?}")]
    UnknownCategory { dialogue_id: String, category: String },
    #[error("missing category: {0}")]
    MissingCategory(String),
    #[error("k = {k} must be between 2 and the number of dialogues ({n})")]
    BadK { k: usize, n: usize },
    #[error("train and test corpora are both {0:?}")]
    SameDataset(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub fold_id: String,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl FoldSpec {
    /// True if train and test are disjoint and together cover `ids` exactly.
    pub fn partitions<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> bool {
        let all: BTreeSet<&str> = ids.into_iter().collect();
        let train: BTreeSet<&str> = self.train.iter().map(String::as_str).collect();
        let test: BTreeSet<&str> = self.test.iter().map(String::as_str).collect();
        train.len() == self.train.len()
            && test.len() == self.test.len()
            && train.is_disjoint(&test)
            && train.union(&test).copied().collect::<BTreeSet<_>>() == all
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldManifest {
    pub folds: Vec<FoldSpec>,
    pub seed: Option<u64>,
}

fn sorted_ids(corpus: &Corpus) -> Vec<String> {
    let mut ids: Vec<String> = corpus.dialogues.iter().map(|d| d.dialogue_id.clone()).collect();
    ids.sort();
    ids
}

fn fold(fold_id: String, ids: &[String], test: BTreeSet<&str>) -> FoldSpec {
    FoldSpec {
        fold_id,
        train: ids.iter().filter(|id| !test.contains(id.as_str())).cloned().collect(),
        test: ids.iter().filter(|id| test.contains(id.as_str())).cloned().collect(),
    }
}

/// One fold per image category, holding out that category's dialogues.
pub fn agos_folds(corpus: &Corpus) -> Result<Vec<FoldSpec>, SplitError> {
    let mut by_cat: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); AGOS_CATEGORIES.len()];
    for d in &corpus.dialogues {
        let cat = d
            .category
            .as_deref()
            .ok_or_else(|| SplitError::MissingCategory(format!("dialogue {} has no category", d.dialogue_id)))?;
        let norm = cat.trim().to_lowercase();
        let k = AGOS_CATEGORIES.iter().position(|&c| c == norm).ok_or_else(|| SplitError::UnknownCategory {
            dialogue_id: d.dialogue_id.clone(),
            category: cat.to_owned(),
        })?;
        by_cat[k].insert(&d.dialogue_id);
    }
    if let Some(k) = by_cat.iter().position(BTreeSet::is_empty) {
        return Err(SplitError::MissingCategory(format!("no dialogues in category {}", AGOS_CATEGORIES[k])));
    }
    let ids = sorted_ids(corpus);
    Ok(AGOS_CATEGORIES.iter().zip(by_cat).map(|(c, test)| fold(c.to_string(), &ids, test)).collect())
}

/// Uniform integer in `0..n` by rejection sampling.
fn below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

/// Sort the dialogue ids, shuffle them with Fisher-Yates driven by
/// ChaCha8 seeded from `seed`, and cut the result into `k` contiguous test
/// sets. The first `n % k` sets get one extra dialogue.
pub fn random_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<FoldSpec>, SplitError> {
    let ids = sorted_ids(corpus);
    let n = ids.len();
    if k < 2 || k > n {
        return Err(SplitError::BadK { k, n });
    }
    let mut order: Vec<&str> = ids.iter().map(String::as_str).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = below(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let test = order[at..at + size].iter().copied().collect();
        folds.push(fold(format!("fold-{}", f + 1), &ids, test));
        at += size;
    }
    Ok(folds)
}

/// Train on all of `train`, test on all of `test`.
pub fn transfer_config(train: &Corpus, test: &Corpus) -> Result<FoldSpec, SplitError> {
    if train.dataset_id == test.dataset_id {
        return Err(SplitError::SameDataset(train.dataset_id.clone()));
    }
    Ok(FoldSpec {
        fold_id: format!("{}->{}", train.dataset_id, test.dataset_id),
        train: sorted_ids(train),
        test: sorted_ids(test),
    })
}
