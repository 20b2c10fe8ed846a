//! Line-delimited JSON corpus files, one [`PaperRecord`] per line.

use std::collections::HashSet;
use std::path::Path;

use thiserror::Error;

use super::PaperRecord;
use crate::util::write_atomic;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema {
        path: String,
        line: usize,
        message: String,
    },
}

pub fn save_corpus(records: &[PaperRecord], path: &Path) -> Result<(), StoreError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("records serialize"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes()).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a corpus file. Blank lines are ignored; every other line must be a
/// valid record with a unique identifier.
pub fn load_corpus(path: &Path) -> Result<Vec<PaperRecord>, StoreError> {
    let text = std::fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let schema = |line: usize, message: String| StoreError::Schema {
        path: path.display().to_string(),
        line,
        message,
    };

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: PaperRecord =
            serde_json::from_str(line).map_err(|e| schema(line_no, e.to_string()))?;
        record.validate().map_err(|m| schema(line_no, m))?;
        if !seen.insert(record.arxiv_id.clone()) {
            return Err(schema(line_no, format!("duplicate arxiv_id {:?}", record.arxiv_id)));
        }
        records.push(record);
    }
    Ok(records)
}
