//! Study dataset ingestion, regressor construction, the eight-column
//! specification ladder and regression-table rendering.

mod ladder;
mod load;
mod record;
mod table;
mod variables;

use thiserror::Error;

use crate::cabin::CabinError;
use crate::data::DataError;
use crate::pds::PdsError;

pub use ladder::{
    assemble, check_recovery, check_spec, column_spec, run_ladder, CheckReport, CoefficientCheck, Controls, SpecColumn,
    SpecLadder, CHECKED_TERMS,
};
pub use load::{load_csv, load_csv_path, LoadOptions, LoadReport, Rejection};
pub use record::{StudyRecord, STUDY_COLUMNS};
pub use table::{round_half_away, thousands, Cell, GroupRow, RegressionTable, TableFormat};
pub use variables::{build_variables, comfort_placebo, names, VariableOptions, BUCKET_LABELS};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("required column `{0}` is missing")]
    MissingColumn(String),
    #[error("{rejected} of {total} rows rejected, above the threshold (first: line {}: {})", first.line, first.reason)]
    TooManyRejections { rejected: usize, total: usize, first: Rejection },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(String),
    #[error("row {row}: unknown seat map `{id}`")]
    UnknownSeatmap { row: usize, id: String },
    #[error("row {row}: {source}")]
    Seat { row: usize, source: CabinError },
    #[error("row {row}: `{field}` must be positive for the log transform (got {value})")]
    NonPositive { row: usize, field: &'static str, value: f64 },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("no ladder column {0} (columns are 1 to 8)")]
    NoSuchColumn(usize),
    #[error("column {column}: {source}")]
    Column { column: String, source: PdsError },
}
