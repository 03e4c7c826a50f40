use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{StudyError, StudyRecord, STUDY_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Largest tolerated share of rejected rows before loading fails.
    pub max_rejected_share: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { max_rejected_share: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line in the file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub records: Vec<StudyRecord>,
    pub rejected: Vec<Rejection>,
    /// Header of the file as read, including any extra columns.
    pub columns: Vec<String>,
}

/// Reads study rows, keeping the valid ones and recording why others were
/// rejected. Extra columns are ignored.
pub fn load_csv<R: Read>(reader: R, opts: &LoadOptions) -> Result<LoadReport, StudyError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let columns: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    for want in STUDY_COLUMNS {
        if !columns.iter().any(|c| c == want) {
            return Err(StudyError::MissingColumn(want.to_string()));
        }
    }
    let trimmed = csv::StringRecord::from(columns.clone());
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let parsed = if row.len() != trimmed.len() {
            Err(format!("expected {} fields, found {}", trimmed.len(), row.len()))
        } else {
            row.deserialize::<StudyRecord>(Some(&trimmed)).map_err(|e| match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => match err.field() {
                    Some(i) => format!("column `{}`: {}", columns[i as usize], err.kind()),
                    None => err.to_string(),
                },
                _ => e.to_string(),
            })
        };
        match parsed.and_then(|r| r.check().map(|_| r)) {
            Ok(r) => records.push(r),
            Err(reason) => rejected.push(Rejection { line, reason }),
        }
    }
    let total = records.len() + rejected.len();
    if total > 0 && rejected.len() as f64 > opts.max_rejected_share * total as f64 {
        return Err(StudyError::TooManyRejections { rejected: rejected.len(), total, first: rejected[0].clone() });
    }
    for r in &rejected {
        log::warn!("line {}: rejected ({})", r.line, r.reason);
    }
    Ok(LoadReport { records, rejected, columns })
}

pub fn load_csv_path(path: &Path, opts: &LoadOptions) -> Result<LoadReport, StudyError> {
    let file = File::open(path).map_err(|e| StudyError::Io(format!("{}: {e}", path.display())))?;
    load_csv(std::io::BufReader::new(file), opts)
}
