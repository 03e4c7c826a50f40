use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DesignMatrix, OlsFit, RegressError, Values};

/// Finite-sample factor for the clustered sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClusterAdjust {
    /// No adjustment.
    Cr0,
    /// `G/(G-1) * (n-1)/(n-k)`.
    #[default]
    Cr1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceKind {
    Classical,
    Hc1,
    Cluster(ClusterAdjust),
}

/// Cluster membership of each design row, as dense ids `0..count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Clusters {
    ids: Vec<usize>,
    count: usize,
}

impl Clusters {
    pub fn new(ids: Vec<usize>, count: usize) -> Result<Self, RegressError> {
        let mut sizes = vec![0usize; count];
        for &id in &ids {
            if id >= count {
                return Err(RegressError::EmptyCluster(id));
            }
            sizes[id] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(RegressError::EmptyCluster(empty));
        }
        Ok(Clusters { ids, count })
    }

    /// Ids are assigned in sorted label order.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut order: BTreeMap<&str, usize> = labels.iter().map(|l| (l.as_ref(), 0)).collect();
        for (i, v) in order.values_mut().enumerate() {
            *v = i;
        }
        let ids = labels.iter().map(|l| order[l.as_ref()]).collect();
        Clusters { ids, count: order.len() }
    }

    /// Each row its own cluster.
    pub fn singletons(n: usize) -> Self {
        Clusters { ids: (0..n).collect(), count: n }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// `s^2 (X'X)^-1` with `s^2 = SSR/(n-k)`.
pub fn classical_cov(fit: &OlsFit) -> DMatrix<f64> {
    fit.xtx_inv() * (fit.ssr / (fit.n - fit.k) as f64)
}

/// Heteroskedasticity-robust sandwich scaled by `n/(n-k)`.
pub fn hc1_cov(dm: &DesignMatrix, fit: &OlsFit) -> DMatrix<f64> {
    let meat = meat(dm, fit, &Clusters::singletons(fit.n));
    sandwich(fit, &meat, fit.n as f64 / (fit.n - fit.k) as f64)
}

/// Cluster-robust sandwich `c A M A` with `A = (X'X)^-1` and
/// `M = sum_g X_g' u_g u_g' X_g`.
pub fn cluster_cov(
    dm: &DesignMatrix,
    fit: &OlsFit,
    clusters: &Clusters,
    adjust: ClusterAdjust,
) -> Result<DMatrix<f64>, RegressError> {
    if clusters.len() != fit.n {
        return Err(RegressError::ClusterLength { expected: fit.n, found: clusters.len() });
    }
    let g = clusters.count();
    if g < 2 {
        return Err(RegressError::TooFewClusters(g));
    }
    let (n, k, gf) = (fit.n as f64, fit.k as f64, g as f64);
    let c = match adjust {
        ClusterAdjust::Cr0 => 1.0,
        // With one row per cluster the factor reduces to HC1's n/(n-k).
        ClusterAdjust::Cr1 if g == fit.n => n / (n - k),
        ClusterAdjust::Cr1 => gf / (gf - 1.0) * (n - 1.0) / (n - k),
    };
    Ok(sandwich(fit, &meat(dm, fit, clusters), c))
}

fn meat(dm: &DesignMatrix, fit: &OlsFit, clusters: &Clusters) -> DMatrix<f64> {
    let g = clusters.count();
    let ids = clusters.ids();
    // scores[g, j] = sum over rows of cluster g of x_ij u_i
    let mut scores = DMatrix::<f64>::zeros(g, fit.k);
    for (j, &u) in fit.used.iter().enumerate() {
        match u {
            None => {
                for (i, r) in fit.residuals.iter().enumerate() {
                    scores[(ids[i], j)] += r;
                }
            }
            Some(c) => match &dm.columns[c].values {
                Values::Dense(v) => {
                    for (i, (x, r)) in v.iter().zip(&fit.residuals).enumerate() {
                        scores[(ids[i], j)] += x * r;
                    }
                }
                Values::Indicator(idx) => {
                    for &i in idx {
                        scores[(ids[i as usize], j)] += fit.residuals[i as usize];
                    }
                }
            },
        }
    }
    scores.transpose() * scores
}

fn sandwich(fit: &OlsFit, meat: &DMatrix<f64>, c: f64) -> DMatrix<f64> {
    let a = fit.xtx_inv();
    let v = (&a * meat * &a) * c;
    (&v + v.transpose()) * 0.5
}
