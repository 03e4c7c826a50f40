use serde::{Deserialize, Serialize};

use super::LassoError;
use crate::regress::{DesignMatrix, Values};

/// Per-column centering and scaling used by the solver. Penalized columns
/// are centered and scaled to unit root-mean-square; unpenalized columns
/// keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub names: Vec<String>,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub penalized: Vec<bool>,
}

impl ScaleRecord {
    /// Standardized view of a raw column; unpenalized columns pass through.
    pub fn transform_column(&self, j: usize, raw: &[f64]) -> Vec<f64> {
        if !self.penalized[j] {
            return raw.to_vec();
        }
        raw.iter().map(|x| (x - self.center[j]) / self.scale[j]).collect()
    }

    pub fn back_transform_column(&self, j: usize, std: &[f64]) -> Vec<f64> {
        if !self.penalized[j] {
            return std.to_vec();
        }
        std.iter().map(|z| z * self.scale[j] + self.center[j]).collect()
    }

    /// Original-scale intercept and slopes from solver coefficients, given
    /// the response mean.
    pub fn to_original(&self, y_mean: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        let slopes: Vec<f64> = beta.iter().zip(&self.scale).map(|(b, s)| b / s).collect();
        let intercept = y_mean - slopes.iter().zip(&self.center).map(|(b, m)| b * m).sum::<f64>();
        (intercept, slopes)
    }
}

/// A set of design columns prepared for coordinate descent. Columns are
/// borrowed, never densified: indicator columns keep their sparse form and
/// the centering is applied implicitly.
#[derive(Debug, Clone)]
pub struct Standardized<'a> {
    pub(crate) cols: Vec<&'a Values>,
    pub(crate) col_sum: Vec<f64>,
    pub(crate) record: ScaleRecord,
    /// `sum_i ((x_ij - m_j) / s_j)^2 / n`: 1 for penalized columns.
    pub(crate) sq_mean: Vec<f64>,
    pub(crate) n: usize,
}

impl<'a> Standardized<'a> {
    /// Standardizes the listed design columns; `penalized[i]` flags `cols[i]`.
    pub fn new(dm: &'a DesignMatrix, cols: &[usize], penalized: &[bool]) -> Result<Self, LassoError> {
        assert_eq!(cols.len(), penalized.len());
        let n = dm.n();
        let nf = n as f64;
        let mut out = Standardized {
            cols: Vec::with_capacity(cols.len()),
            col_sum: Vec::with_capacity(cols.len()),
            record: ScaleRecord {
                names: Vec::new(),
                center: Vec::new(),
                scale: Vec::new(),
                penalized: penalized.to_vec(),
            },
            sq_mean: Vec::with_capacity(cols.len()),
            n,
        };
        for (&c, &pen) in cols.iter().zip(penalized) {
            let col = &dm.columns[c];
            let sum = col.values.sum();
            let mean = sum / nf;
            let var = match &col.values {
                Values::Dense(v) => v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf,
                Values::Indicator(_) => mean * (1.0 - mean),
            };
            if !(var > 0.0) {
                return Err(LassoError::ConstantColumn(col.name.clone()));
            }
            let scale = if pen { var.sqrt() } else { 1.0 };
            out.cols.push(&col.values);
            out.col_sum.push(sum);
            out.record.names.push(col.name.clone());
            out.record.center.push(mean);
            out.record.scale.push(scale);
            out.sq_mean.push(var / (scale * scale));
        }
        Ok(out)
    }

    /// Every design column, with the given penalty flags.
    pub fn all(dm: &'a DesignMatrix, penalized: &[bool]) -> Result<Self, LassoError> {
        let cols: Vec<usize> = (0..dm.columns.len()).collect();
        Self::new(dm, &cols, penalized)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.cols.len()
    }

    pub fn penalized_count(&self) -> usize {
        self.record.penalized.iter().filter(|&&p| p).count()
    }

    pub fn record(&self) -> &ScaleRecord {
        &self.record
    }

    /// Dense standardized column `j`, centered even when unpenalized (the
    /// form the solver works with).
    pub fn solver_column(&self, j: usize) -> Vec<f64> {
        let m = self.record.center[j];
        let s = self.record.scale[j];
        self.cols[j].to_dense(self.n).into_iter().map(|x| (x - m) / s).collect()
    }

    /// `sum_i z_ij w_i` for the solver column `j`.
    pub(crate) fn dot(&self, j: usize, w: &[f64]) -> f64 {
        let sum_w: f64 = w.iter().sum();
        (self.cols[j].dot(w) - self.record.center[j] * sum_w) / self.record.scale[j]
    }

    /// `sum_i z_ij^2 w_i^2 / n`.
    pub(crate) fn weighted_sq_mean(&self, j: usize, w2: &[f64], sum_w2: f64) -> f64 {
        let m = self.record.center[j];
        let s = self.record.scale[j];
        let total = match self.cols[j] {
            Values::Dense(v) => v.iter().zip(w2).map(|(x, e)| (x - m).powi(2) * e).sum::<f64>(),
            Values::Indicator(idx) => {
                let inside: f64 = idx.iter().map(|&i| w2[i as usize]).sum();
                m * m * sum_w2 + ((1.0 - m).powi(2) - m * m) * inside
            }
        };
        total / (s * s) / self.n as f64
    }
}

/// Standardizes every column of `dm`, penalizing those listed.
pub fn standardize<'a>(
    dm: &'a DesignMatrix,
    penalized: &[usize],
) -> Result<(Standardized<'a>, ScaleRecord), LassoError> {
    let flags: Vec<bool> = (0..dm.columns.len()).map(|j| penalized.contains(&j)).collect();
    let s = Standardized::all(dm, &flags)?;
    let rec = s.record.clone();
    Ok((s, rec))
}
