//! Dataset CSV ingestion and export.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use epl_core::{Dataset, EplError, Permutation};
use serde::Serialize;

/// How the integers in each row are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Row lists items from first to last position.
    Ordering,
    /// Row gives the position of each item.
    Ranking,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Ordering => "ordering",
            Orientation::Ranking => "ranking",
        })
    }
}

#[derive(Debug)]
pub enum IngestError {
    Io(String),
    /// `row` is the 1-based line number in the file.
    Row { row: usize, message: String },
    Dataset(EplError),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io(m) => write!(f, "{m}"),
            IngestError::Row { row, message } => write!(f, "row {row}: {message}"),
            IngestError::Dataset(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IngestError {}

pub fn ingest(path: &Path, orientation: Orientation) -> Result<Dataset, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::Io(format!("{}: {e}", path.display())))?;
    ingest_reader(file, orientation)
}

/// Reads one permutation per row. A first row that is not all integers is
/// taken as a header; blank lines are skipped.
pub fn ingest_reader<R: Read>(reader: R, orientation: Orientation) -> Result<Dataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| IngestError::Io(e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<usize>, _> = record.iter().map(usize::from_str).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(record.len());
                continue;
            }
            Err(_) => {
                return Err(IngestError::Row {
                    row: line,
                    message: format!("non-integer field in '{}'", record.iter().collect::<Vec<_>>().join(",")),
                })
            }
        };
        match width {
            Some(w) if w != values.len() => {
                return Err(IngestError::Row {
                    row: line,
                    message: format!("expected {w} columns, found {}", values.len()),
                })
            }
            None => width = Some(values.len()),
            _ => {}
        }
        let perm = Permutation::from_one_based(&values).map_err(|e| IngestError::Row {
            row: line,
            message: e.to_string(),
        })?;
        rows.push(perm);
    }
    if rows.is_empty() {
        return Err(IngestError::Dataset(EplError::Empty("dataset file has no rows")));
    }
    match orientation {
        Orientation::Ordering => Dataset::new(rows),
        Orientation::Ranking => Dataset::from_rankings(rows),
    }
    .map_err(IngestError::Dataset)
}

/// Writes one row per unit in the requested orientation, optionally preceded
/// by a header naming positions (`p1..pK`) or items (`i1..iK`).
pub fn export<W: Write>(data: &Dataset, orientation: Orientation, header: bool, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if header {
        let prefix = match orientation {
            Orientation::Ordering => "p",
            Orientation::Ranking => "i",
        };
        w.write_record((1..=data.k()).map(|j| format!("{prefix}{j}")))?;
    }
    let rows = match orientation {
        Orientation::Ordering => data.orderings().to_vec(),
        Orientation::Ranking => data.rankings(),
    };
    for row in rows {
        w.write_record(row.to_one_based().iter().map(|v| v.to_string()))?;
    }
    w.flush()
}
