use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;
use spanmark_core::corpus::{self, compute_stats, Corpus, CorpusError, StatsReport};
use spanmark_core::sample::{export_jsonl, SampleBuilder};
use spanmark_core::splits::{agos_folds, random_folds, transfer_config, FoldManifest};
use spanmark_core::WindowSpec;

use crate::error::OrInvalid;
use crate::manifest::{out_dir, RunManifest};
use crate::MarkerArgs;
use crate::SplitMode;

/// Load and validate a corpus, listing every violation on stderr.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    match corpus::load_corpus(path) {
        Err(CorpusError::InvariantViolation(vs)) => {
            for v in &vs {
                eprintln!("{}: {v}", path.display());
            }
            Err(CorpusError::InvariantViolation(vs)).or_invalid_with(|| path.display().to_string())
        }
        other => other.or_invalid(),
    }
}

pub fn stats(paths: &[impl AsRef<Path>], as_json: bool, out: Option<&Path>) -> Result<()> {
    let mut reports: Vec<(String, StatsReport)> = Vec::new();
    for p in paths {
        let c = load_corpus(p.as_ref())?;
        reports.push((c.dataset_id.clone(), compute_stats(&c)));
    }
    let columns: Vec<(&str, &StatsReport)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let table = StatsReport::table(&columns);
    let json: serde_json::Map<String, serde_json::Value> =
        reports.iter().map(|(n, r)| (n.clone(), serde_json::to_value(r).expect("stats serialize"))).collect();
    let json = serde_json::to_string_pretty(&json)? + "\n";

    if as_json {
        print!("{json}");
    } else {
        print!("{table}");
    }
    if let Some(dir) = out {
        let dir = out_dir(dir)?;
        std::fs::write(dir.join("stats.json"), &json)?;
        std::fs::write(dir.join("stats.txt"), &table)?;
        let mut m = RunManifest::new("stats", json!({}));
        for p in paths {
            m = m.input(p.as_ref())?;
        }
        m.output("stats.json").output("stats.txt").write(dir)?;
    }
    Ok(())
}

pub fn build_samples(corpus: &Path, window: usize, out: &Path, inference_token: &str, markers: &MarkerArgs) -> Result<()> {
    let c = load_corpus(corpus)?;
    let builder = SampleBuilder::new(WindowSpec(window), markers.config()?).with_inference_token(inference_token);
    let samples = builder.corpus_samples(&c.dialogues).or_invalid()?;
    let dir = out_dir(out)?;
    let n = export_jsonl(&samples, dir.join("samples.jsonl")).context("writing samples")?;
    RunManifest::new(
        "build-samples",
        json!({ "window": window, "inference_token": inference_token, "markers": markers }),
    )
    .input(corpus)?
    .output("samples.jsonl")
    .write(dir)?;
    eprintln!("{n} samples from {} utterances", c.n_utterances());
    Ok(())
}

pub fn split(corpus: &Path, mode: SplitMode, k: usize, seed: u64, test: Option<&Path>, out: &Path) -> Result<()> {
    let c = load_corpus(corpus)?;
    let mut m = RunManifest::new("split", json!({ "mode": mode, "k": k, "seed": seed })).input(corpus)?;
    let manifest = match mode {
        SplitMode::Agos => FoldManifest { folds: agos_folds(&c).or_invalid()?, seed: None },
        SplitMode::Random => {
            m = m.seed(seed);
            FoldManifest { folds: random_folds(&c, k, seed).or_invalid()?, seed: Some(seed) }
        }
        SplitMode::Transfer => {
            let path = test.context("--test is required for transfer").or_invalid()?;
            let t = load_corpus(path)?;
            m = m.input(path)?;
            FoldManifest { folds: vec![transfer_config(&c, &t).or_invalid()?], seed: None }
        }
    };
    let dir = out_dir(out)?;
    std::fs::write(dir.join("folds.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    m.output("folds.json").write(dir)?;
    for f in &manifest.folds {
        eprintln!("{}: {} train, {} test", f.fold_id, f.train.len(), f.test.len());
    }
    Ok(())
}
