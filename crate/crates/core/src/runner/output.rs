use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// A CSV cell. Floats are written with 17 significant digits so they parse
/// back bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug)]
pub enum Artifact {
    Csv { name: String, header: Vec<String>, rows: Vec<Vec<Cell>> },
    Json { name: String, value: serde_json::Value },
}

impl Artifact {
    pub fn csv(name: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Artifact::Csv { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        let value = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Artifact::Json { name: name.into(), value })
    }

    pub fn name(&self) -> &str {
        match self {
            Artifact::Csv { name, .. } | Artifact::Json { name, .. } => name,
        }
    }

    fn bytes(&self) -> Result<Vec<u8>> {
        match self {
            Artifact::Csv { header, rows, .. } => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                w.write_record(header).map_err(|e| Error::Format(e.to_string()))?;
                for row in rows {
                    if row.len() != header.len() {
                        return Err(Error::Format(format!("row of {} cells under {} columns", row.len(), header.len())));
                    }
                    w.write_record(row.iter().map(Cell::render)).map_err(|e| Error::Format(e.to_string()))?;
                }
                w.into_inner().map_err(|e| Error::Format(e.to_string()))
            }
            Artifact::Json { value, .. } => {
                // serde_json maps are ordered by key, so output is canonical
                let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
                text.push('\n');
                Ok(text.into_bytes())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact under `out_dir` and returns the file list in
/// artifact order.
pub fn write_results(artifacts: &[Artifact], out_dir: &Path) -> Result<Vec<FileEntry>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    artifacts
        .iter()
        .map(|a| {
            let bytes = a.bytes()?;
            let path = out_dir.join(a.name());
            fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            Ok(FileEntry { path: a.name().into(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
        })
        .collect()
}

/// Header and raw string rows of a CSV artifact.
pub fn read_csv_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Format(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()).map_err(|e| Error::Format(e.to_string())))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}
