use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::json;
use spanmark_core::jsonl::read_jsonl_file;
use spanmark_core::metrics::{load_predictions, save_predictions};
use spanmark_core::np::{default_stoplist, np_baseline as baseline, TreeRecord};
use spanmark_core::{evaluate as score, parse, Prediction, PredictionSet};

use crate::data::load_corpus;
use crate::error::{invalid, OrInvalid};
use crate::manifest::{out_dir, RunManifest};
use crate::MarkerArgs;

pub fn evaluate(corpus: &Path, predictions: &Path, report: Option<&Path>, subset: bool, as_json: bool) -> Result<()> {
    let c = load_corpus(corpus)?;
    let pred = load_predictions(predictions).or_invalid_with(|| predictions.display().to_string())?;
    pred.validate_against(&c).or_invalid()?;
    let mut gold = PredictionSet::from_corpus(&c);
    if subset {
        gold = gold.restricted_to(&pred);
    }
    let r = score(&gold, &pred).or_invalid()?;
    let json = serde_json::to_string_pretty(&r)? + "\n";
    let table = r.table();
    if as_json {
        print!("{json}");
    } else {
        print!("{table}");
    }
    if let Some(dir) = report {
        let dir = out_dir(dir)?;
        std::fs::write(dir.join("report.json"), &json)?;
        std::fs::write(dir.join("report.txt"), &table)?;
        RunManifest::new("evaluate", json!({ "subset": subset }))
            .input(corpus)?
            .input(predictions)?
            .output("report.json")
            .output("report.txt")
            .write(dir)?;
    }
    Ok(())
}

pub fn np_baseline(corpus: &Path, trees: &Path, stoplist: Option<&Path>, out: &Path) -> Result<()> {
    let c = load_corpus(corpus)?;
    let records: Vec<TreeRecord> = read_jsonl_file(trees).or_invalid_with(|| trees.display().to_string())?;
    let mut seen = BTreeSet::new();
    for r in &records {
        if c.dialogue(&r.dialogue_id).and_then(|d| d.utterance(r.index)).is_none() {
            return Err(invalid(format!("tree for ({}, {}) names no utterance of the corpus", r.dialogue_id, r.index)));
        }
        if !seen.insert((r.dialogue_id.as_str(), r.index)) {
            return Err(invalid(format!("two trees for ({}, {})", r.dialogue_id, r.index)));
        }
    }
    let stop: BTreeSet<String> = match stoplist {
        Some(p) => std::fs::read_to_string(p)
            .or_invalid_with(|| p.display().to_string())?
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect(),
        None => default_stoplist(),
    };
    let preds = baseline(&c, &records, &stop);
    let dir = out_dir(out)?;
    save_predictions(&preds, dir.join("predictions.jsonl")).context("writing predictions")?;
    let mut m = RunManifest::new("np-baseline", json!({ "stoplist": stop })).input(corpus)?.input(trees)?;
    if let Some(p) = stoplist {
        m = m.input(p)?;
    }
    m.output("predictions.jsonl").write(dir)?;
    eprintln!("{} spans over {} utterances, {} without a usable tree", preds.n_spans(), preds.len(), preds.parse_failures());
    Ok(())
}

/// One line of a generations file.
#[derive(Debug, Deserialize)]
struct Generation {
    dialogue_id: String,
    #[serde(alias = "utterance_index")]
    index: usize,
    #[serde(alias = "completion")]
    generation: String,
}

pub fn parse_output(corpus: &Path, generations: &Path, out: &Path, markers: &MarkerArgs) -> Result<()> {
    let c = load_corpus(corpus)?;
    let cfg = markers.config()?;
    let gens: Vec<Generation> = read_jsonl_file(generations).or_invalid_with(|| generations.display().to_string())?;
    let mut preds = PredictionSet::new();
    for g in gens {
        let u = c
            .dialogue(&g.dialogue_id)
            .and_then(|d| d.utterance(g.index))
            .ok_or_else(|| invalid(format!("generation for ({}, {}) names no utterance of the corpus", g.dialogue_id, g.index)))?;
        if preds.get(&g.dialogue_id, g.index).is_some() {
            return Err(invalid(format!("two generations for ({}, {})", g.dialogue_id, g.index)));
        }
        let text = g.generation.strip_suffix('\n').map(|s| s.strip_suffix('\r').unwrap_or(s)).unwrap_or(&g.generation);
        let prefix = format!("{}: ", u.speaker);
        let body = text.strip_prefix(prefix.as_str()).unwrap_or(text);
        let p = match parse(body, &u.text, &cfg) {
            Ok(spans) => Prediction { spans, parse_error: None },
            Err(e) => Prediction { spans: Vec::new(), parse_error: Some(e.code().to_owned()) },
        };
        preds.insert(g.dialogue_id, g.index, p);
    }
    let dir = out_dir(out)?;
    save_predictions(&preds, dir.join("predictions.jsonl")).context("writing predictions")?;
    RunManifest::new("parse-output", json!({ "markers": markers }))
        .input(corpus)?
        .input(generations)?
        .output("predictions.jsonl")
        .write(dir)?;
    eprintln!("{} generations, {} unparseable", preds.len(), preds.parse_failures());
    Ok(())
}
