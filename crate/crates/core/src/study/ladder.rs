use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{Cell, GroupRow, RegressionTable};
use super::variables::names::*;
use super::StudyError;
use crate::data::Dataset;
use crate::lasso::LassoConfig;
use crate::pds::{pds_estimate, ControlGroup, PdsResult, PdsSpec};
use crate::regress::Term;
use crate::synth::TrueParams;

/// Candidate control groups of the ladder, by display name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Controls {
    SurveyDate,
    DepartureHour,
    Airport,
    PaxProfile,
}

impl Controls {
    pub const ALL: [Controls; 4] =
        [Controls::SurveyDate, Controls::DepartureHour, Controls::Airport, Controls::PaxProfile];

    pub fn label(self) -> &'static str {
        match self {
            Controls::SurveyDate => "Svy Date Controls",
            Controls::DepartureHour => "Flight Time Controls",
            Controls::Airport => "Airport Controls",
            Controls::PaxProfile => "PAX Profile Controls",
        }
    }

    pub fn group(self) -> ControlGroup {
        match self {
            Controls::SurveyDate => ControlGroup::dummies(self.label(), SVY_DATE),
            Controls::DepartureHour => ControlGroup::dummies(self.label(), DEP_HOUR),
            Controls::Airport => ControlGroup {
                name: self.label().to_string(),
                terms: vec![Term::MultiCategorical {
                    columns: vec![ORIGIN.to_string(), DESTINATION.to_string()],
                    prefix: "airport".into(),
                    drop_baseline: false,
                }],
            },
            Controls::PaxProfile => ControlGroup::dummies(self.label(), PAX_PROFILE),
        }
    }
}

/// One column of the ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecColumn {
    pub label: String,
    /// Unpenalized regressors, in display order.
    pub interest: Vec<String>,
    pub controls: Vec<Controls>,
}

impl SpecColumn {
    pub fn uses_pitch_index(&self) -> bool {
        self.interest.iter().any(|c| c == IPITCH)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecLadder {
    pub columns: Vec<SpecColumn>,
}

impl SpecLadder {
    /// The eight-column ladder: regressors enter cumulatively, the booking
    /// interactions and placebo arrive in (6), airport and passenger-profile
    /// controls in (7), and (8) swaps the row-density index for the pitch index.
    pub fn standard() -> Self {
        let with = |base: &[&'static str], extra: &[&'static str]| -> Vec<&'static str> {
            let mut v = base.to_vec();
            v.extend_from_slice(extra);
            v
        };
        let c1: Vec<&'static str> = vec![ADV, DIST];
        let c2 = with(&c1, &[BSN]);
        let c3 = with(&c2, &[FLTIME, SHIPMENT, REVPAX, LF, FUELP, HUB]);
        let c4 = with(&c3, &[SEATSH, RHHI]);
        let c5 = with(&c4, &[LASTROW, EMERGEXIT, COMFORT, MIDDLE]);
        let mut c6 = with(&c4, &[LASTROW, EMERGEXIT, COMFORT, COMFORT_PLACEBO]);
        c6.extend(MIDDLE_ADV);
        let basic = vec![Controls::SurveyDate, Controls::DepartureHour];
        let mut columns = Vec::new();
        for (i, regs) in [c1, c2, c3, c4, c5, c6.clone(), c6.clone(), c6].into_iter().enumerate() {
            let mut interest: Vec<String> = regs.iter().map(|s| s.to_string()).collect();
            interest.push(if i == 7 { IPITCH } else { IROWDENS }.to_string());
            let controls = if i >= 6 { Controls::ALL.to_vec() } else { basic.clone() };
            columns.push(SpecColumn { label: format!("({})", i + 1), interest, controls });
        }
        SpecLadder { columns }
    }

    /// Keeps the listed 1-based columns.
    pub fn select(&self, which: &[usize]) -> Result<SpecLadder, StudyError> {
        let mut columns = Vec::with_capacity(which.len());
        for &w in which {
            let c = w.checked_sub(1).and_then(|i| self.columns.get(i)).ok_or(StudyError::NoSuchColumn(w))?;
            columns.push(c.clone());
        }
        Ok(SpecLadder { columns })
    }
}

/// Column specification as a PDS problem on the estimation dataset.
pub fn column_spec(column: &SpecColumn, lasso: &LassoConfig) -> PdsSpec {
    let mut spec = PdsSpec::new(
        P,
        column.interest.iter().map(|c| Term::numeric(c)).collect(),
        column.controls.iter().map(|c| c.group()).collect(),
    );
    spec.cluster = Some(ROUTE.to_string());
    spec.lasso = lasso.clone();
    spec
}

/// Estimates every ladder column (concurrently) and assembles the table.
pub fn run_ladder(
    data: &Dataset,
    ladder: &SpecLadder,
    lasso: &LassoConfig,
) -> Result<(RegressionTable, Vec<PdsResult>), StudyError> {
    let results: Vec<PdsResult> = ladder
        .columns
        .par_iter()
        .map(|c| {
            pds_estimate(data, &column_spec(c, lasso))
                .map_err(|source| StudyError::Column { column: c.label.clone(), source })
        })
        .collect::<Result<_, _>>()?;
    Ok((assemble(ladder, &results), results))
}

const ROW_ORDER: [&str; 22] = [
    ADV,
    DIST,
    BSN,
    FLTIME,
    SHIPMENT,
    REVPAX,
    LF,
    FUELP,
    HUB,
    SEATSH,
    RHHI,
    LASTROW,
    EMERGEXIT,
    COMFORT,
    COMFORT_PLACEBO,
    MIDDLE,
    MIDDLE_ADV[0],
    MIDDLE_ADV[1],
    MIDDLE_ADV[2],
    MIDDLE_ADV[3],
    IROWDENS,
    IPITCH,
];

pub fn assemble(ladder: &SpecLadder, results: &[PdsResult]) -> RegressionTable {
    let mut rows: Vec<String> = ROW_ORDER
        .iter()
        .filter(|r| ladder.columns.iter().any(|c| c.interest.iter().any(|i| i == *r)))
        .map(|r| r.to_string())
        .collect();
    for c in &ladder.columns {
        for i in &c.interest {
            if !rows.contains(i) {
                rows.push(i.clone());
            }
        }
    }
    let cells = rows
        .iter()
        .map(|r| {
            results.iter().map(|res| res.get(r).map(|e| Cell { estimate: e.estimate, se: e.se, p: e.p })).collect()
        })
        .collect();
    let groups = Controls::ALL
        .iter()
        .map(|g| GroupRow {
            name: g.label().to_string(),
            counts: results
                .iter()
                .map(|res| res.group_counts.iter().find(|c| c.group == g.label()).map(|c| (c.selected, c.candidates)))
                .collect(),
        })
        .collect();
    RegressionTable {
        columns: ladder.columns.iter().map(|c| c.label.clone()).collect(),
        rows,
        cells,
        estimator: "PDS/LASSO".into(),
        clusters: results.iter().map(|r| r.fit.clusters).collect(),
        groups,
        aic: results.iter().map(|r| r.fit.stats.aic).collect(),
        bic: results.iter().map(|r| r.fit.stats.bic).collect(),
        adj_r2: results.iter().map(|r| r.fit.stats.adj_r2).collect(),
        rmse: results.iter().map(|r| r.fit.stats.rmse).collect(),
        n: results.iter().map(|r| r.fit.n).collect(),
    }
}

/// Regressors compared with the generator's structural coefficients.
pub const CHECKED_TERMS: [&str; 10] = [DIST, BSN, FLTIME, SHIPMENT, FUELP, HUB, SEATSH, RHHI, IROWDENS, IPITCH];

/// Recovery specification: every structural regressor, the booking-curve
/// nuisance terms, and all four control groups.
pub fn check_spec(lasso: &LassoConfig) -> PdsSpec {
    let mut interest: Vec<Term> = CHECKED_TERMS.iter().map(|c| Term::numeric(c)).collect();
    interest.push(Term::numeric(ADV));
    interest.push(Term::numeric(LF));
    interest.push(Term::numeric(BOOKED_AHEAD));
    interest.push(Term::Categorical { column: ADV_BUCKET.to_string(), drop_baseline: true });
    let mut spec = PdsSpec::new(P, interest, Controls::ALL.iter().map(|c| c.group()).collect());
    spec.cluster = Some(ROUTE.to_string());
    spec.lasso = lasso.clone();
    spec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub name: String,
    pub truth: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub coefficients: Vec<CoefficientCheck>,
    pub threshold: f64,
    pub n: usize,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.coefficients.iter().all(|c| c.z.abs() < self.threshold)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<10} {:>10} {:>10} {:>10} {:>8}\n", "term", "truth", "estimate", "se", "z");
        for c in &self.coefficients {
            out.push_str(&format!(
                "{:<10} {:>10.4} {:>10.4} {:>10.4} {:>8.2}\n",
                c.name, c.truth, c.estimate, c.se, c.z
            ));
        }
        let verdict = if self.passed() { "all within" } else { "NOT all within" };
        out.push_str(&format!("n = {}; {verdict} |z| < {}\n", self.n, self.threshold));
        out
    }
}

/// Compares recovered coefficients with the truth, as z-scores.
pub fn check_recovery(data: &Dataset, truth: &TrueParams, lasso: &LassoConfig) -> Result<CheckReport, StudyError> {
    let result = pds_estimate(data, &check_spec(lasso))
        .map_err(|source| StudyError::Column { column: "check".into(), source })?;
    let theta: BTreeMap<&str, f64> = truth.theta.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let coefficients = CHECKED_TERMS
        .iter()
        .map(|&name| {
            let e = result.get(name).expect("checked regressor estimated");
            let t = theta.get(name).copied().unwrap_or(0.0);
            CoefficientCheck {
                name: name.to_string(),
                truth: t,
                estimate: e.estimate,
                se: e.se,
                z: (e.estimate - t) / e.se,
            }
        })
        .collect();
    Ok(CheckReport { coefficients, threshold: 3.0, n: result.fit.n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_ladder_shape() {
        let l = SpecLadder::standard();
        assert_eq!(l.columns.len(), 8);
        assert_eq!(l.columns[0].interest, vec![ADV, DIST, IROWDENS]);
        for (i, c) in l.columns.iter().enumerate() {
            assert_eq!(c.uses_pitch_index(), i == 7);
            assert_eq!(c.interest.iter().any(|x| x == IROWDENS), i < 7);
            assert_eq!(c.controls.len(), if i >= 6 { 4 } else { 2 });
        }
        assert!(l.columns[4].interest.iter().any(|x| x == MIDDLE));
        for c in &l.columns[5..] {
            assert!(!c.interest.iter().any(|x| x == MIDDLE));
            assert!(MIDDLE_ADV.iter().all(|m| c.interest.iter().any(|x| x == m)));
            assert!(c.interest.iter().any(|x| x == COMFORT_PLACEBO));
        }
    }

    #[test]
    fn select_columns() {
        let l = SpecLadder::standard();
        let s = l.select(&[1, 8]).unwrap();
        assert_eq!(s.columns.len(), 2);
        assert_eq!(s.columns[1].label, "(8)");
        assert!(matches!(l.select(&[9]), Err(StudyError::NoSuchColumn(9))));
        assert!(matches!(l.select(&[0]), Err(StudyError::NoSuchColumn(0))));
    }
}
