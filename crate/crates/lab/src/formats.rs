//! Value-table files and JSON-lines streams.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use bandit_lab_core::table::{TableHeader, ValueTable};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, json_err, LabError, LabResult};

/// On-disk table: the header followed by row-major `[b][iu][iℓ]` arrays.
#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    header: TableHeader,
    values: Vec<f64>,
    actions: Vec<u32>,
}

pub fn write_table(path: &Path, table: &ValueTable) -> LabResult<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let doc = TableFile {
        header: table.header.clone(),
        values: table.values().to_vec(),
        actions: table.actions().to_vec(),
    };
    serde_json::to_writer(&mut w, &doc).map_err(json_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_table(path: &Path) -> LabResult<ValueTable> {
    let file = File::open(path).map_err(io_err(path))?;
    let doc: TableFile = serde_json::from_reader(BufReader::new(file)).map_err(json_err(path))?;
    Ok(ValueTable::from_parts(doc.header, doc.values, doc.actions)?)
}

/// One JSON document per line.
pub fn write_jsonl<T: Serialize>(
    mut w: impl Write,
    items: impl IntoIterator<Item = T>,
) -> LabResult<()> {
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(json_err("<jsonl>"))?;
        w.write_all(b"\n").map_err(io_err("<jsonl>"))?;
    }
    w.flush().map_err(io_err("<jsonl>"))
}

pub fn write_jsonl_file<T: Serialize>(
    path: &Path,
    items: impl IntoIterator<Item = T>,
) -> LabResult<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_jsonl(BufWriter::new(file), items).map_err(|e| match e {
        LabError::Io { source, .. } => LabError::Io {
            path: path.into(),
            source,
        },
        LabError::Json { source, .. } => LabError::Json {
            path: path.into(),
            source,
        },
        other => other,
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> LabResult<Vec<T>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(json_err(path))?);
    }
    Ok(out)
}
