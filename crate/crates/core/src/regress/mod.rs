//! Design matrices, least squares, cluster-robust covariance and fit statistics.

mod covariance;
mod design;
mod ols;
mod stats;

use thiserror::Error;

pub use covariance::{classical_cov, cluster_cov, hc1_cov, ClusterAdjust, Clusters, CovarianceKind};
pub use design::{build_design, subset_rows, DesignColumn, DesignMatrix, ModelSpec, Provenance, Term, Values};
pub use ols::{ols_fit, ols_fit_dropping, DroppedColumn, OlsFit, INTERCEPT};
pub use stats::{fit_stats, infer, significance_stars, Coefficient, FitResult, FitStats};

use crate::data::DataError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
    #[error("column `{column}`, row {row}: missing value")]
    Missing { column: String, row: usize },
    #[error("column `{column}`, row {row}: non-finite value")]
    NonFinite { column: String, row: usize },
    #[error("column `{column}`, row {row}: log of non-positive value {value}")]
    NonPositiveLog { column: String, row: usize, value: f64 },
    #[error("duplicate design column `{0}`")]
    DuplicateColumn(String),
    #[error("rank deficient: `{column}` is a linear combination of {}", dependent_on.join(", "))]
    RankDeficient { column: String, dependent_on: Vec<String> },
    #[error("need more observations than regressors (n = {n}, k = {k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("clustered covariance needs at least 2 clusters, found {0}")]
    TooFewClusters(usize),
    #[error("cluster {0} has no rows")]
    EmptyCluster(usize),
    #[error("cluster assignment covers {found} rows, design has {expected}")]
    ClusterLength { expected: usize, found: usize },
}

impl From<DataError> for RegressError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::UnknownColumn(c) => RegressError::UnknownColumn(c),
            DataError::NotNumeric(c) => RegressError::NotNumeric(c),
            other => RegressError::UnknownColumn(other.to_string()),
        }
    }
}
