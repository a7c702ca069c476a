use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::json;
use spanmark_core::iob::{
    build_labeled_window, from_iob, read_conll, whitespace_views, write_conll, ConllBlock, OverlapPolicy, Token,
};
use spanmark_core::jsonl::read_jsonl_file;
use spanmark_core::metrics::save_predictions;
use spanmark_core::{Corpus, IobLabel, Prediction, PredictionSet, TokenizationView, WindowSpec};

use crate::data::load_corpus;
use crate::error::{invalid, OrInvalid};
use crate::manifest::{out_dir, RunManifest};
use crate::{Policy, ViewKind};

/// One line of a token file: the tokenization of one utterance.
#[derive(Debug, Deserialize)]
struct ViewRecord {
    dialogue_id: String,
    index: usize,
    tokens: Vec<Token>,
}

fn file_views(corpus: &Corpus, path: &Path) -> Result<HashMap<String, Vec<TokenizationView>>> {
    let records: Vec<ViewRecord> = read_jsonl_file(path).or_invalid_with(|| path.display().to_string())?;
    let mut by_key: HashMap<(String, usize), Vec<Token>> =
        records.into_iter().map(|r| ((r.dialogue_id, r.index), r.tokens)).collect();
    let mut out = HashMap::new();
    for d in &corpus.dialogues {
        let mut views = Vec::with_capacity(d.utterances.len());
        for u in &d.utterances {
            let tokens = by_key
                .remove(&(d.dialogue_id.clone(), u.index))
                .ok_or_else(|| invalid(format!("no tokens for ({}, {})", d.dialogue_id, u.index)))?;
            views.push(TokenizationView { tokens });
        }
        out.insert(d.dialogue_id.clone(), views);
    }
    Ok(out)
}

pub fn export(
    corpus: &Path,
    window: usize,
    view: ViewKind,
    view_file: Option<&Path>,
    policy: Policy,
    out: &Path,
) -> Result<()> {
    let c = load_corpus(corpus)?;
    let mut from_file = match (view, view_file) {
        (ViewKind::File, Some(p)) => Some(file_views(&c, p)?),
        (ViewKind::File, None) => return Err(invalid("--view file needs --view-file")),
        (ViewKind::Whitespace, _) => None,
    };
    let overlap = match policy {
        Policy::Any => OverlapPolicy::AnyOverlap,
        Policy::Full => OverlapPolicy::FullContainment,
    };
    let mut blocks = Vec::with_capacity(c.n_utterances());
    for d in &c.dialogues {
        let views = match from_file.as_mut() {
            Some(m) => m.remove(&d.dialogue_id).expect("one entry per dialogue"),
            None => whitespace_views(d),
        };
        for u in &d.utterances {
            let seq = build_labeled_window(d, u.index, WindowSpec(window), &views, overlap)
                .or_invalid_with(|| format!("dialogue {}, utterance {}", d.dialogue_id, u.index))?;
            blocks.push(ConllBlock::from(&seq));
        }
    }
    let dir = out_dir(out)?;
    let mut w = BufWriter::new(File::create(dir.join("windows.conll")).context("creating windows.conll")?);
    write_conll(&blocks, &mut w)?;
    w.flush()?;
    let mut m = RunManifest::new("export-iob", json!({ "window": window, "view": view, "policy": policy })).input(corpus)?;
    if let Some(p) = view_file {
        m = m.input(p)?;
    }
    m.output("windows.conll").write(dir)?;
    eprintln!("{} windows", blocks.len());
    Ok(())
}

/// The target part of a block: every row after the last `IGNORE`.
fn target_rows(block: &ConllBlock) -> &[(Token, IobLabel)] {
    let from = block.rows.iter().rposition(|(_, l)| *l == IobLabel::Ignore).map_or(0, |i| i + 1);
    &block.rows[from..]
}

pub fn import(corpus: &Path, labels: &Path, out: &Path) -> Result<()> {
    let c = load_corpus(corpus)?;
    let f = File::open(labels).or_invalid_with(|| labels.display().to_string())?;
    let blocks = read_conll(BufReader::new(f)).or_invalid_with(|| labels.display().to_string())?;
    let mut preds = PredictionSet::new();
    let mut repairs = 0;
    for b in &blocks {
        let u = c
            .dialogue(&b.dialogue_id)
            .and_then(|d| d.utterance(b.index))
            .ok_or_else(|| invalid(format!("block ({}, {}) names no utterance of the corpus", b.dialogue_id, b.index)))?;
        if preds.get(&b.dialogue_id, b.index).is_some() {
            return Err(invalid(format!("two blocks for ({}, {})", b.dialogue_id, b.index)));
        }
        let rows = target_rows(b);
        let view = TokenizationView { tokens: rows.iter().map(|(t, _)| t.clone()).collect() };
        view.check(&u.text).or_invalid_with(|| format!("block ({}, {})", b.dialogue_id, b.index))?;
        let tags: Vec<IobLabel> = rows.iter().map(|(_, l)| *l).collect();
        let decoded = from_iob(&tags, &view).or_invalid()?;
        repairs += decoded.repairs;
        preds.insert(b.dialogue_id.clone(), b.index, Prediction { spans: decoded.spans, parse_error: None });
    }
    let dir = out_dir(out)?;
    save_predictions(&preds, dir.join("predictions.jsonl")).context("writing predictions")?;
    RunManifest::new("import-iob", json!({})).input(corpus)?.input(labels)?.output("predictions.jsonl").write(dir)?;
    eprintln!("{} blocks, {repairs} I labels without a preceding B repaired", blocks.len());
    Ok(())
}
