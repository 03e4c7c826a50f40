use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::RegressError;
use crate::data::{Column, Dataset};

/// Column storage. Binary columns are kept as the sorted row indices where
/// the value is one.
#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Dense(Vec<f64>),
    Indicator(Vec<u32>),
}

impl Values {
    /// Stores `v` as an indicator when every entry is 0 or 1.
    pub fn from_dense(v: Vec<f64>) -> Values {
        if v.iter().all(|&x| x == 0.0 || x == 1.0) {
            Values::Indicator(v.iter().enumerate().filter(|(_, &x)| x == 1.0).map(|(i, _)| i as u32).collect())
        } else {
            Values::Dense(v)
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        match self {
            Values::Dense(v) => v.clone(),
            Values::Indicator(idx) => {
                let mut out = vec![0.0; n];
                for &i in idx {
                    out[i as usize] = 1.0;
                }
                out
            }
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            Values::Dense(v) => v[i],
            Values::Indicator(idx) => {
                if idx.binary_search(&(i as u32)).is_ok() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        match self {
            Values::Dense(v) => v.iter().zip(w).map(|(a, b)| a * b).sum(),
            Values::Indicator(idx) => idx.iter().map(|&i| w[i as usize]).sum(),
        }
    }

    pub fn sum(&self) -> f64 {
        match self {
            Values::Dense(v) => v.iter().sum(),
            Values::Indicator(idx) => idx.len() as f64,
        }
    }

    /// Keeps only the listed rows (ascending), renumbering them.
    fn subset(&self, keep: &[usize], n_total: usize) -> Values {
        match self {
            Values::Dense(v) => Values::Dense(keep.iter().map(|&i| v[i]).collect()),
            Values::Indicator(idx) => {
                let mut new_pos = vec![u32::MAX; n_total];
                for (j, &i) in keep.iter().enumerate() {
                    new_pos[i] = j as u32;
                }
                Values::Indicator(idx.iter().map(|&i| new_pos[i as usize]).filter(|&p| p != u32::MAX).collect())
            }
        }
    }

    fn is_constant(&self, n: usize) -> bool {
        match self {
            Values::Dense(v) => v.iter().all(|&x| x == v[0]),
            Values::Indicator(idx) => idx.is_empty() || idx.len() == n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Raw,
    Log,
    Dummy { source: String, level: String },
    Interaction { numeric: String, source: String, level: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignColumn {
    pub name: String,
    pub provenance: Provenance,
    /// Index of the model term that produced this column.
    pub term: usize,
    pub values: Values,
}

/// Response plus named regressors. The intercept, when requested, is implicit
/// and is not stored among `columns`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub y_name: String,
    pub y: Vec<f64>,
    pub columns: Vec<DesignColumn>,
    pub intercept: bool,
    /// Dataset row of each design row.
    pub rows: Vec<usize>,
    /// Regressors removed because they were constant on the kept rows.
    pub dropped_constant: Vec<String>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Dense `n x p` copy of the regressors (no intercept), row-major rows.
    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let cols: Vec<Vec<f64>> = self.columns.iter().map(|c| c.values.to_dense(n)).collect();
        (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
    }

    /// Copy restricted to the listed regressors, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DesignMatrix {
        DesignMatrix {
            y_name: self.y_name.clone(),
            y: self.y.clone(),
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
            intercept: self.intercept,
            rows: self.rows.clone(),
            dropped_constant: self.dropped_constant.clone(),
        }
    }

    /// Same regressors with a different response.
    pub fn with_response(&self, name: &str, y: Vec<f64>) -> DesignMatrix {
        assert_eq!(y.len(), self.n());
        DesignMatrix { y_name: name.to_string(), y, ..self.clone() }
    }

    /// Builds a design directly from dense columns; binary columns become indicators.
    pub fn from_dense(y_name: &str, y: Vec<f64>, columns: Vec<(String, Vec<f64>)>, intercept: bool) -> Self {
        let n = y.len();
        DesignMatrix {
            y_name: y_name.to_string(),
            y,
            columns: columns
                .into_iter()
                .enumerate()
                .map(|(term, (name, v))| {
                    assert_eq!(v.len(), n, "column {name} length");
                    DesignColumn { name, provenance: Provenance::Raw, term, values: Values::from_dense(v) }
                })
                .collect(),
            intercept,
            rows: (0..n).collect(),
            dropped_constant: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Numeric {
        column: String,
        log: bool,
    },
    /// One dummy per level; the lexicographically first level is dropped when `drop_baseline`.
    Categorical {
        column: String,
        drop_baseline: bool,
    },
    /// One dummy per level pooled over several columns (a row is one for every
    /// level it shows in any of the columns).
    MultiCategorical {
        columns: Vec<String>,
        prefix: String,
        drop_baseline: bool,
    },
    /// Numeric column times each level dummy of a categorical column.
    Interaction {
        numeric: String,
        categorical: String,
        drop_baseline: bool,
    },
}

impl Term {
    pub fn numeric(column: &str) -> Term {
        Term::Numeric { column: column.to_string(), log: false }
    }

    pub fn log(column: &str) -> Term {
        Term::Numeric { column: column.to_string(), log: true }
    }

    pub fn categorical(column: &str) -> Term {
        Term::Categorical { column: column.to_string(), drop_baseline: true }
    }

    fn columns(&self) -> Vec<&str> {
        match self {
            Term::Numeric { column, .. } | Term::Categorical { column, .. } => vec![column],
            Term::MultiCategorical { columns, .. } => columns.iter().map(String::as_str).collect(),
            Term::Interaction { numeric, categorical, .. } => vec![numeric, categorical],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub response: String,
    pub log_response: bool,
    pub terms: Vec<Term>,
    pub intercept: bool,
    /// Columns whose missing values drop the row instead of failing.
    pub optional: Vec<String>,
}

impl ModelSpec {
    pub fn new(response: &str, terms: Vec<Term>) -> Self {
        ModelSpec { response: response.to_string(), log_response: false, terms, intercept: true, optional: Vec::new() }
    }
}

/// Assembles the response and regressors described by `spec`.
pub fn build_design(data: &Dataset, spec: &ModelSpec) -> Result<DesignMatrix, RegressError> {
    let n_total = data.n_rows();
    let mut referenced: Vec<&str> = vec![spec.response.as_str()];
    for t in &spec.terms {
        referenced.extend(t.columns());
    }
    for name in &referenced {
        if !data.has(name) {
            return Err(RegressError::UnknownColumn(name.to_string()));
        }
    }

    // rows surviving missing-value handling
    let optional: HashSet<&str> = spec.optional.iter().map(String::as_str).collect();
    let mut keep = Vec::with_capacity(n_total);
    'rows: for i in 0..n_total {
        for name in &referenced {
            let col = data.column(name)?;
            if col.is_missing(i) {
                if optional.contains(name) {
                    continue 'rows;
                }
                return Err(RegressError::Missing { column: name.to_string(), row: i });
            }
        }
        keep.push(i);
    }
    if keep.len() < n_total {
        log::info!("build_design: {} rows dropped for missing optional values", n_total - keep.len());
    }

    let y = numeric_values(data, &spec.response, spec.log_response, &keep)?;

    let mut columns = Vec::new();
    for (t, term) in spec.terms.iter().enumerate() {
        let first = columns.len();
        match term {
            Term::Numeric { column, log } => {
                let v = numeric_values(data, column, *log, &keep)?;
                columns.push(DesignColumn {
                    name: column.clone(),
                    provenance: if *log { Provenance::Log } else { Provenance::Raw },
                    term: t,
                    values: Values::from_dense(v),
                });
            }
            Term::Categorical { column, drop_baseline } => {
                let labels = data.labels(column)?;
                let labels: Vec<&str> = keep.iter().map(|&i| labels[i].as_str()).collect();
                columns.extend(dummies(column, &[labels], *drop_baseline, None));
            }
            Term::MultiCategorical { columns: cols, prefix, drop_baseline } => {
                let mut sets = Vec::new();
                for c in cols {
                    let labels = data.labels(c)?;
                    sets.push(keep.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>());
                }
                let views: Vec<Vec<&str>> = sets.iter().map(|s| s.iter().map(String::as_str).collect()).collect();
                columns.extend(dummies(prefix, &views, *drop_baseline, None));
            }
            Term::Interaction { numeric, categorical, drop_baseline } => {
                let x = numeric_values(data, numeric, false, &keep)?;
                let labels = data.labels(categorical)?;
                let labels: Vec<&str> = keep.iter().map(|&i| labels[i].as_str()).collect();
                columns.extend(dummies(categorical, &[labels], *drop_baseline, Some((numeric, &x))));
            }
        }
        columns[first..].iter_mut().for_each(|c| c.term = t);
    }

    let mut seen = HashSet::new();
    for c in &columns {
        if !seen.insert(c.name.as_str()) {
            return Err(RegressError::DuplicateColumn(c.name.clone()));
        }
    }

    let n = keep.len();
    let mut dropped_constant = Vec::new();
    columns.retain(|c| {
        if c.values.is_constant(n) {
            log::info!("build_design: dropping constant regressor `{}`", c.name);
            dropped_constant.push(c.name.clone());
            false
        } else {
            true
        }
    });

    Ok(DesignMatrix {
        y_name: spec.response.clone(),
        y,
        columns,
        intercept: spec.intercept,
        rows: keep,
        dropped_constant,
    })
}

fn numeric_values(data: &Dataset, name: &str, log: bool, keep: &[usize]) -> Result<Vec<f64>, RegressError> {
    let v = match data.column(name)? {
        Column::Numeric(v) => v,
        Column::Categorical(_) => return Err(RegressError::NotNumeric(name.to_string())),
    };
    keep.iter()
        .map(|&i| {
            let x = v[i];
            if !x.is_finite() {
                return Err(RegressError::NonFinite { column: name.to_string(), row: i });
            }
            if log {
                if x <= 0.0 {
                    return Err(RegressError::NonPositiveLog { column: name.to_string(), row: i, value: x });
                }
                Ok(x.ln())
            } else {
                Ok(x)
            }
        })
        .collect()
}

/// Level dummies over one or more label vectors, optionally scaled by a numeric column.
fn dummies(
    source: &str,
    label_sets: &[Vec<&str>],
    drop_baseline: bool,
    scale: Option<(&String, &Vec<f64>)>,
) -> Vec<DesignColumn> {
    let mut rows_by_level: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    let n = label_sets.first().map_or(0, Vec::len);
    for i in 0..n {
        for set in label_sets {
            let rows = rows_by_level.entry(set[i]).or_default();
            if rows.last() != Some(&(i as u32)) {
                rows.push(i as u32);
            }
        }
    }
    rows_by_level
        .into_iter()
        .skip(usize::from(drop_baseline))
        .map(|(level, rows)| match scale {
            None => DesignColumn {
                name: format!("{source}={level}"),
                provenance: Provenance::Dummy { source: source.to_string(), level: level.to_string() },
                term: 0,
                values: Values::Indicator(rows),
            },
            Some((numeric, x)) => {
                let mut v = vec![0.0; n];
                for &i in &rows {
                    v[i as usize] = x[i as usize];
                }
                DesignColumn {
                    name: format!("{numeric}×{source}({level})"),
                    provenance: Provenance::Interaction {
                        numeric: numeric.clone(),
                        source: source.to_string(),
                        level: level.to_string(),
                    },
                    term: 0,
                    values: Values::from_dense(v),
                }
            }
        })
        .collect()
}

/// Restricts a design to a subset of its rows.
pub fn subset_rows(dm: &DesignMatrix, keep: &[usize]) -> DesignMatrix {
    let n = dm.n();
    DesignMatrix {
        y_name: dm.y_name.clone(),
        y: keep.iter().map(|&i| dm.y[i]).collect(),
        columns: dm.columns.iter().map(|c| DesignColumn { values: c.values.subset(keep, n), ..c.clone() }).collect(),
        intercept: dm.intercept,
        rows: keep.iter().map(|&i| dm.rows[i]).collect(),
        dropped_constant: dm.dropped_constant.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> Dataset {
        let mut ds = Dataset::new(4);
        ds.push("y", Column::Numeric(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        ds.push("dist", Column::Numeric(vec![1000.0, 500.0, 250.0, 2000.0])).unwrap();
        ds.push("cat", Column::Categorical(vec!["b".into(), "a".into(), "c".into(), "a".into()])).unwrap();
        ds.push("middle", Column::Numeric(vec![1.0, 0.0, 1.0, 1.0])).unwrap();
        ds.push("bucket", Column::Categorical(vec!["1w".into(), "1w".into(), "2w".into(), ">3w".into()])).unwrap();
        ds.push("k", Column::Numeric(vec![3.0; 4])).unwrap();
        ds.push("opt", Column::Numeric(vec![1.0, f64::NAN, 2.0, 5.0])).unwrap();
        ds
    }

    #[test]
    fn log_transform() {
        let dm = build_design(&data(), &ModelSpec::new("y", vec![Term::log("dist")])).unwrap();
        assert!((dm.columns[0].values.get(0) - 6.907_755_278_982_137).abs() < 1e-12);
        assert_eq!(dm.columns[0].provenance, Provenance::Log);
    }

    #[test]
    fn categorical_drops_first_level() {
        let dm = build_design(&data(), &ModelSpec::new("y", vec![Term::categorical("cat")])).unwrap();
        let names: Vec<&str> = dm.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["cat=b", "cat=c"]);
        assert_eq!(dm.columns[0].values, Values::Indicator(vec![0]));
    }

    #[test]
    fn interaction_with_all_levels() {
        let term = Term::Interaction { numeric: "middle".into(), categorical: "bucket".into(), drop_baseline: false };
        let dm = build_design(&data(), &ModelSpec::new("y", vec![term])).unwrap();
        let row0: Vec<(String, f64)> = dm.columns.iter().map(|c| (c.name.clone(), c.values.get(0))).collect();
        assert_eq!(
            row0,
            vec![
                ("middle×bucket(1w)".to_string(), 1.0),
                ("middle×bucket(2w)".to_string(), 0.0),
                ("middle×bucket(>3w)".to_string(), 0.0),
            ]
        );
    }

    #[test]
    fn errors() {
        let ds = data();
        assert!(matches!(
            build_design(&ds, &ModelSpec::new("y", vec![Term::numeric("nope")])),
            Err(RegressError::UnknownColumn(_))
        ));
        let mut neg = ds.clone();
        neg.set("dist", Column::Numeric(vec![1.0, 0.0, 1.0, 1.0])).unwrap();
        assert!(matches!(
            build_design(&neg, &ModelSpec::new("y", vec![Term::log("dist")])),
            Err(RegressError::NonPositiveLog { row: 1, .. })
        ));
        assert!(matches!(
            build_design(&ds, &ModelSpec::new("y", vec![Term::numeric("opt")])),
            Err(RegressError::Missing { row: 1, .. })
        ));
    }

    #[test]
    fn optional_and_constant_columns() {
        let mut spec = ModelSpec::new("y", vec![Term::numeric("opt"), Term::numeric("k")]);
        spec.optional.push("opt".into());
        let dm = build_design(&data(), &spec).unwrap();
        assert_eq!(dm.rows, vec![0, 2, 3]);
        assert_eq!(dm.dropped_constant, vec!["k".to_string()]);
        assert_eq!(dm.columns.len(), 1);
    }

    #[test]
    fn multi_categorical_pools_levels() {
        let mut ds = Dataset::new(3);
        ds.push("y", Column::Numeric(vec![1.0, 2.0, 3.0])).unwrap();
        ds.push("o", Column::Categorical(vec!["GRU".into(), "SDU".into(), "CGH".into()])).unwrap();
        ds.push("d", Column::Categorical(vec!["SDU".into(), "CGH".into(), "GRU".into()])).unwrap();
        let term = Term::MultiCategorical {
            columns: vec!["o".into(), "d".into()],
            prefix: "apt".into(),
            drop_baseline: false,
        };
        let dm = build_design(&ds, &ModelSpec::new("y", vec![term])).unwrap();
        assert_eq!(dm.columns.len(), 3);
        assert_eq!(dm.columns[1].name, "apt=GRU");
        assert_eq!(dm.columns[1].values, Values::Indicator(vec![0, 2]));
    }
}
