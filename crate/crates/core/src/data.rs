//! Column-named tables of numeric and categorical values.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("column `{0}` not found")]
    UnknownColumn(String),
    #[error("column `{name}` has {found} values, expected {expected}")]
    Length { name: String, expected: usize, found: usize },
    #[error("duplicate column `{0}`")]
    Duplicate(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
}

/// Missing numeric values are NaN; missing categorical values are empty strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Numeric(v) => v[row].is_nan(),
            Column::Categorical(v) => v[row].is_empty(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Column>,
    index: HashMap<String, usize>,
    n_rows: usize,
    /// Column holding the cluster (airport-pair) identifier, when clustering is used.
    pub cluster_key: Option<String>,
}

impl Dataset {
    pub fn new(n_rows: usize) -> Self {
        Dataset { n_rows, ..Default::default() }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn push(&mut self, name: impl Into<String>, column: Column) -> Result<(), DataError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(DataError::Duplicate(name));
        }
        if self.columns.is_empty() && self.n_rows == 0 {
            self.n_rows = column.len();
        }
        if column.len() != self.n_rows {
            return Err(DataError::Length { name, expected: self.n_rows, found: column.len() });
        }
        self.index.insert(name.clone(), self.columns.len());
        self.names.push(name);
        self.columns.push(column);
        Ok(())
    }

    /// Inserts or replaces a column.
    pub fn set(&mut self, name: impl Into<String>, column: Column) -> Result<(), DataError> {
        let name = name.into();
        match self.index.get(&name) {
            Some(&i) => {
                if column.len() != self.n_rows {
                    return Err(DataError::Length { name, expected: self.n_rows, found: column.len() });
                }
                self.columns[i] = column;
                Ok(())
            }
            None => self.push(name, column),
        }
    }

    pub fn column(&self, name: &str) -> Result<&Column, DataError> {
        self.index.get(name).map(|&i| &self.columns[i]).ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64], DataError> {
        match self.column(name)? {
            Column::Numeric(v) => Ok(v),
            Column::Categorical(_) => Err(DataError::NotNumeric(name.to_string())),
        }
    }

    /// String view of any column (numeric values formatted with `{}`).
    pub fn labels(&self, name: &str) -> Result<Vec<String>, DataError> {
        Ok(match self.column(name)? {
            Column::Categorical(v) => v.clone(),
            Column::Numeric(v) => v.iter().map(|x| if x.is_nan() { String::new() } else { x.to_string() }).collect(),
        })
    }

    /// Reads RFC-4180 CSV with a header row. Columns listed in `categorical`
    /// stay text; every other column becomes numeric if all its non-empty
    /// fields parse as numbers.
    pub fn from_csv<R: Read>(reader: R, categorical: &[&str]) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for rec in rdr.records() {
            let rec = rec?;
            for (i, field) in rec.iter().enumerate() {
                raw[i].push(field.trim().to_string());
            }
        }
        let mut ds = Dataset::new(raw.first().map_or(0, Vec::len));
        for (name, values) in headers.into_iter().zip(raw) {
            let numeric = !categorical.contains(&name.as_str())
                && values.iter().all(|v| v.is_empty() || v.parse::<f64>().is_ok());
            let col = if numeric {
                Column::Numeric(values.iter().map(|v| v.parse().unwrap_or(f64::NAN)).collect())
            } else {
                Column::Categorical(values)
            };
            ds.push(name, col)?;
        }
        Ok(ds)
    }
}
