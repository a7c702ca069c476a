//! Newline-delimited JSON helpers.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Write one JSON object per line; returns the number of records written.
pub fn write_jsonl<T: Serialize>(records: &[T], out: impl Write) -> io::Result<usize> {
    let mut w = BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(records.len())
}

/// Read JSON lines, skipping blank ones.
pub fn read_jsonl<T: DeserializeOwned>(input: impl Read) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| JsonlError::Json { line: i + 1, source })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, JsonlError> {
    read_jsonl(File::open(path)?)
}

pub fn write_jsonl_file<T: Serialize>(records: &[T], path: impl AsRef<Path>) -> io::Result<usize> {
    write_jsonl(records, File::create(path)?)
}
