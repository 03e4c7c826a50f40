//! Post-double-selection: LASSO of the outcome and of each regressor of
//! interest on the candidate controls, then OLS on the union of the selected
//! controls with cluster-robust inference.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::lasso::{rlasso, LassoConfig, LassoError, LassoReport, Standardized};
use crate::regress::{
    build_design, infer, ols_fit_dropping, significance_stars, ClusterAdjust, Clusters, CovarianceKind, DesignMatrix,
    DroppedColumn, FitResult, ModelSpec, RegressError, Term,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdsError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error("selection equation for `{equation}`: {source}")]
    Lasso { equation: String, source: LassoError },
    #[error("regressor of interest `{column}` is collinear with {}", dependent_on.join(", "))]
    InterestCollinear { column: String, dependent_on: Vec<String> },
}

/// A named set of penalized candidate controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlGroup {
    pub name: String,
    pub terms: Vec<Term>,
}

impl ControlGroup {
    /// One dummy per level of `column`, no level dropped.
    pub fn dummies(name: &str, column: &str) -> Self {
        ControlGroup {
            name: name.to_string(),
            terms: vec![Term::Categorical { column: column.to_string(), drop_baseline: false }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdsSpec {
    pub outcome: String,
    pub log_outcome: bool,
    /// Never penalized, always kept.
    pub interest: Vec<Term>,
    pub groups: Vec<ControlGroup>,
    /// Column holding the cluster label; heteroskedasticity-robust errors when absent.
    pub cluster: Option<String>,
    pub cluster_adjust: ClusterAdjust,
    /// Columns whose missing values drop the row.
    pub optional: Vec<String>,
    pub lasso: LassoConfig,
}

impl PdsSpec {
    pub fn new(outcome: &str, interest: Vec<Term>, groups: Vec<ControlGroup>) -> Self {
        PdsSpec {
            outcome: outcome.to_string(),
            log_outcome: false,
            interest,
            groups,
            cluster: None,
            cluster_adjust: ClusterAdjust::Cr1,
            optional: Vec::new(),
            lasso: LassoConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PdsError> {
        let sources = |terms: &[Term]| -> Vec<String> {
            terms
                .iter()
                .flat_map(|t| match t {
                    Term::Numeric { column, .. } | Term::Categorical { column, .. } => {
                        vec![column.clone()]
                    }
                    Term::MultiCategorical { columns, .. } => columns.clone(),
                    Term::Interaction { numeric, categorical, .. } => vec![numeric.clone(), categorical.clone()],
                })
                .collect()
        };
        let interest: HashSet<String> = sources(&self.interest).into_iter().collect();
        if interest.contains(&self.outcome) {
            return Err(PdsError::Spec(format!("outcome `{}` is also a regressor of interest", self.outcome)));
        }
        let mut names = HashSet::new();
        for g in &self.groups {
            if !names.insert(g.name.as_str()) {
                return Err(PdsError::Spec(format!("control group `{}` declared twice", g.name)));
            }
            for c in sources(&g.terms) {
                if c == self.outcome {
                    return Err(PdsError::Spec(format!("outcome `{c}` appears in control group `{}`", g.name)));
                }
                if interest.contains(&c) {
                    return Err(PdsError::Spec(format!("`{c}` is both of interest and in control group `{}`", g.name)));
                }
            }
        }
        self.lasso.validate().map_err(|source| PdsError::Lasso { equation: String::new(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterestEstimate {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCount {
    pub group: String,
    pub selected: usize,
    pub candidates: usize,
}

impl GroupCount {
    pub fn render(&self) -> String {
        format!("{}/{}", self.selected, self.candidates)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEquation {
    pub response: String,
    pub selected: Vec<String>,
    pub converged: bool,
    pub diagnostics: Option<LassoReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdsResult {
    pub interest: Vec<InterestEstimate>,
    pub group_counts: Vec<GroupCount>,
    /// Selected controls in declaration order.
    pub union: Vec<String>,
    pub equations: Vec<SelectionEquation>,
    /// Controls removed from the final regression as collinear with earlier columns.
    pub dropped: Vec<DroppedColumn>,
    pub fit: FitResult,
    /// False when any selection step hit an iteration cap.
    pub converged: bool,
}

impl PdsResult {
    pub fn get(&self, name: &str) -> Option<&InterestEstimate> {
        self.interest.iter().find(|c| c.name == name)
    }
}

/// `k/N` strings per declared control group, in declaration order.
pub fn report_selected_counts(result: &PdsResult) -> Vec<(String, String)> {
    result.group_counts.iter().map(|g| (g.group.clone(), g.render())).collect()
}

/// Runs the three-step procedure on `data`.
pub fn pds_estimate(data: &Dataset, spec: &PdsSpec) -> Result<PdsResult, PdsError> {
    spec.validate()?;
    let mut terms = spec.interest.clone();
    for g in &spec.groups {
        terms.extend(g.terms.iter().cloned());
    }
    let mut optional = spec.optional.clone();
    if let Some(c) = &spec.cluster {
        if !data.has(c) {
            return Err(RegressError::UnknownColumn(c.clone()).into());
        }
        // a missing cluster label is an error, not a silent drop
        optional.retain(|o| o != c);
    }
    let model =
        ModelSpec { response: spec.outcome.clone(), log_response: spec.log_outcome, terms, intercept: true, optional };
    let dm = build_design(data, &model)?;

    // term index -> group (None for interest)
    let n_interest_terms = spec.interest.len();
    let mut term_group = vec![None; n_interest_terms];
    for (gi, g) in spec.groups.iter().enumerate() {
        term_group.extend(std::iter::repeat_n(Some(gi), g.terms.len()));
    }
    let interest_cols: Vec<usize> =
        (0..dm.columns.len()).filter(|&j| term_group[dm.columns[j].term].is_none()).collect();
    let control_cols: Vec<usize> =
        (0..dm.columns.len()).filter(|&j| term_group[dm.columns[j].term].is_some()).collect();

    let clusters = match &spec.cluster {
        Some(c) => {
            let labels = data.labels(c).map_err(RegressError::from)?;
            let rows: Vec<&str> = dm.rows.iter().map(|&i| labels[i].as_str()).collect();
            if let Some(i) = rows.iter().position(|l| l.is_empty()) {
                return Err(RegressError::Missing { column: c.clone(), row: dm.rows[i] }.into());
            }
            Some(Clusters::from_labels(&rows))
        }
        None => None,
    };

    pds_on_design(&dm, &interest_cols, &control_cols, &term_group, spec, clusters.as_ref())
}

/// Selection and final fit on an assembled design. `term_group[t]` names the
/// control group of design term `t` (`None` for regressors of interest).
fn pds_on_design(
    dm: &DesignMatrix,
    interest_cols: &[usize],
    control_cols: &[usize],
    term_group: &[Option<usize>],
    spec: &PdsSpec,
    clusters: Option<&Clusters>,
) -> Result<PdsResult, PdsError> {
    let n = dm.n();
    let mut responses: Vec<(String, Vec<f64>)> = vec![(dm.y_name.clone(), dm.y.clone())];
    for &j in interest_cols {
        responses.push((dm.columns[j].name.clone(), dm.columns[j].values.to_dense(n)));
    }

    let equations: Vec<SelectionEquation> = if control_cols.is_empty() {
        responses
            .iter()
            .map(|(name, _)| SelectionEquation {
                response: name.clone(),
                selected: Vec::new(),
                converged: true,
                diagnostics: None,
            })
            .collect()
    } else {
        let x = Standardized::new(dm, control_cols, &vec![true; control_cols.len()])
            .map_err(|source| PdsError::Lasso { equation: dm.y_name.clone(), source })?;
        responses
            .par_iter()
            .map(|(name, y)| {
                let fit =
                    rlasso(&x, y, &spec.lasso).map_err(|source| PdsError::Lasso { equation: name.clone(), source })?;
                Ok(SelectionEquation {
                    response: name.clone(),
                    selected: fit.active.clone(),
                    converged: fit.converged && fit.loadings_converged,
                    diagnostics: Some(fit.report()),
                })
            })
            .collect::<Result<_, PdsError>>()?
    };

    let chosen: HashSet<&str> = equations.iter().flat_map(|e| e.selected.iter().map(String::as_str)).collect();
    let union_cols: Vec<usize> =
        control_cols.iter().copied().filter(|&j| chosen.contains(dm.columns[j].name.as_str())).collect();

    let mut final_cols = interest_cols.to_vec();
    final_cols.extend(&union_cols);
    let final_dm = dm.select_columns(&final_cols);
    let ols = ols_fit_dropping(&final_dm)?;
    let interest_names: HashSet<&str> = interest_cols.iter().map(|&j| dm.columns[j].name.as_str()).collect();
    if let Some(d) = ols.dropped.iter().find(|d| interest_names.contains(d.column.as_str())) {
        return Err(PdsError::InterestCollinear { column: d.column.clone(), dependent_on: d.dependent_on.clone() });
    }
    let kind = match clusters {
        Some(_) => CovarianceKind::Cluster(spec.cluster_adjust),
        None => CovarianceKind::Hc1,
    };
    let fit = infer(&final_dm, &ols, kind, clusters)?;

    let interest = interest_cols
        .iter()
        .map(|&j| {
            let c = fit.get(&dm.columns[j].name).expect("interest column kept");
            InterestEstimate {
                name: c.name.clone(),
                estimate: c.estimate,
                se: c.se,
                t: c.t,
                p: c.p,
                stars: significance_stars(c.p).to_string(),
            }
        })
        .collect();

    let kept: HashSet<&str> = ols.names.iter().map(String::as_str).collect();
    let group_counts = spec
        .groups
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let in_group = |j: &&usize| term_group[dm.columns[**j].term] == Some(gi);
            GroupCount {
                group: g.name.clone(),
                selected: union_cols
                    .iter()
                    .filter(in_group)
                    .filter(|&&j| kept.contains(dm.columns[j].name.as_str()))
                    .count(),
                candidates: control_cols.iter().filter(in_group).count(),
            }
        })
        .collect();

    Ok(PdsResult {
        interest,
        group_counts,
        union: union_cols.iter().map(|&j| dm.columns[j].name.clone()).collect(),
        converged: equations.iter().all(|e| e.converged),
        equations,
        dropped: ols.dropped.clone(),
        fit,
    })
}
