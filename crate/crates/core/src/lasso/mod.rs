//! LASSO by coordinate descent with a plug-in penalty level and
//! heteroskedasticity-robust penalty loadings.

mod solver;
mod standardize;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::regress::{ols_fit_dropping, DesignMatrix, Values};

pub use solver::{coordinate_descent, kkt_check, lambda_max};
pub use standardize::{standardize, ScaleRecord, Standardized};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LassoError {
    #[error("invalid LASSO configuration: {0}")]
    Config(String),
    #[error("penalized column `{0}` is constant")]
    ConstantColumn(String),
    #[error("penalty loading for `{0}` is zero")]
    ZeroLoading(String),
    #[error("non-finite value in the response")]
    NonFinite,
}

/// Residuals used to refresh the penalty loadings between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LoadingsRefresh {
    /// Residuals of the penalized fit.
    #[default]
    LassoResiduals,
    /// Residuals of OLS on the selected columns.
    PostOls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub c: f64,
    /// `None` means `0.1 / ln n`.
    pub gamma: Option<f64>,
    pub max_loading_iterations: usize,
    pub loading_tolerance: f64,
    pub cd_tolerance: f64,
    pub cd_max_iterations: usize,
    pub refresh: LoadingsRefresh,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            c: 1.1,
            gamma: None,
            max_loading_iterations: 15,
            loading_tolerance: 1e-4,
            cd_tolerance: 1e-7,
            cd_max_iterations: 10_000,
            refresh: LoadingsRefresh::LassoResiduals,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<(), LassoError> {
        if !(self.c > 1.0) {
            return Err(LassoError::Config(format!("c must exceed 1, got {}", self.c)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(LassoError::Config(format!("gamma must lie in (0, 1), got {g}")));
            }
        }
        if !(self.cd_tolerance > 0.0 && self.loading_tolerance > 0.0) {
            return Err(LassoError::Config("tolerances must be positive".into()));
        }
        if self.max_loading_iterations == 0 || self.cd_max_iterations == 0 {
            return Err(LassoError::Config("iteration limits must be positive".into()));
        }
        Ok(())
    }

    pub fn gamma_for(&self, n: usize) -> f64 {
        self.gamma.unwrap_or_else(|| 0.1 / (n as f64).ln())
    }
}

/// `lambda = 2 c sqrt(n) Phi^-1(1 - gamma / (2p))`.
pub fn plugin_lambda(n: usize, p: usize, cfg: &LassoConfig) -> f64 {
    let gamma = cfg.gamma_for(n);
    let z = Normal::standard().inverse_cdf(1.0 - gamma / (2.0 * p as f64));
    2.0 * cfg.c * (n as f64).sqrt() * z
}

/// Penalty weights, one per column; zero for unpenalized columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyLoadings {
    pub values: Vec<f64>,
}

/// `psi_j = sqrt(mean_i z_ij^2 e_i^2)` for every penalized column.
pub fn penalty_loadings(x: &Standardized, residuals: &[f64]) -> Result<PenaltyLoadings, LassoError> {
    let e2: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let sum_e2: f64 = e2.iter().sum();
    let values = (0..x.p())
        .map(|j| {
            if !x.record.penalized[j] {
                return Ok(0.0);
            }
            let psi = x.weighted_sq_mean(j, &e2, sum_e2).max(0.0).sqrt();
            if psi > 0.0 && psi.is_finite() {
                Ok(psi)
            } else {
                Err(LassoError::ZeroLoading(x.record.names[j].clone()))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(PenaltyLoadings { values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub names: Vec<String>,
    /// Original-scale slopes, one per column.
    pub coefficients: Vec<f64>,
    /// Slopes on the solver's standardized scale.
    pub std_coefficients: Vec<f64>,
    pub intercept: f64,
    /// Penalized columns with a nonzero coefficient.
    pub active: Vec<String>,
    pub penalized: Vec<bool>,
    pub lambda: f64,
    pub loadings: PenaltyLoadings,
    pub objective: f64,
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_max_violation: f64,
    pub loading_iterations: usize,
    /// Largest relative loading change at the last refresh.
    pub loading_change: f64,
    pub loadings_converged: bool,
}

impl LassoFit {
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&j| self.penalized[j] && self.std_coefficients[j] != 0.0).collect()
    }

    pub fn fitted(&self, x: &Standardized) -> Vec<f64> {
        let mut out = vec![self.intercept; x.n()];
        for (j, &b) in self.coefficients.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            match x.cols[j] {
                Values::Dense(v) => out.iter_mut().zip(v).for_each(|(o, xi)| *o += b * xi),
                Values::Indicator(idx) => idx.iter().for_each(|&i| out[i as usize] += b),
            }
        }
        out
    }

    /// Diagnostic summary: penalty level, loadings and active set.
    pub fn report(&self) -> LassoReport {
        LassoReport {
            lambda: self.lambda,
            loadings: self
                .names
                .iter()
                .zip(&self.loadings.values)
                .zip(&self.penalized)
                .filter(|(_, &p)| p)
                .map(|((n, &v), _)| (n.clone(), v))
                .collect(),
            active: self.active.clone(),
            iterations: self.iterations,
            converged: self.converged,
            loading_iterations: self.loading_iterations,
            loadings_converged: self.loadings_converged,
            kkt_max_violation: self.kkt_max_violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoReport {
    pub lambda: f64,
    pub loadings: Vec<(String, f64)>,
    pub active: Vec<String>,
    pub iterations: usize,
    pub converged: bool,
    pub loading_iterations: usize,
    pub loadings_converged: bool,
    pub kkt_max_violation: f64,
}

/// Plug-in penalty with iterated robust loadings: loadings start from the
/// demeaned response, then are refreshed from the residuals of each fit
/// until their relative change falls below the configured tolerance.
pub fn rlasso(x: &Standardized, y: &[f64], cfg: &LassoConfig) -> Result<LassoFit, LassoError> {
    cfg.validate()?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LassoError::NonFinite);
    }
    let n = x.n();
    let p = x.penalized_count().max(1);
    let lambda = plugin_lambda(n, p, cfg);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let e0: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut psi = penalty_loadings(x, &e0)?;
    let mut fit = coordinate_descent(x, y, lambda, &psi, cfg, None);
    let mut iteration = 1;
    let mut change = f64::INFINITY;
    while iteration < cfg.max_loading_iterations {
        let e = match cfg.refresh {
            LoadingsRefresh::LassoResiduals => solver::residuals(x, y, &fit.std_coefficients),
            LoadingsRefresh::PostOls => post_ols_residuals(x, y, &fit),
        };
        let next = penalty_loadings(x, &e)?;
        iteration += 1;
        change = psi
            .values
            .iter()
            .zip(&next.values)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| (b - a).abs() / a)
            .fold(0.0, f64::max);
        if change < cfg.loading_tolerance {
            break;
        }
        psi = next;
        fit = coordinate_descent(x, y, lambda, &psi, cfg, Some(&fit.std_coefficients));
    }
    fit.loading_iterations = iteration;
    fit.loading_change = if iteration == 1 { 0.0 } else { change };
    fit.loadings_converged = iteration == 1 || change < cfg.loading_tolerance;
    if !fit.loadings_converged {
        log::info!("penalty loadings did not settle after {iteration} iterations (change {change:.3e})");
    }
    Ok(fit)
}

/// Residuals of OLS of `y` on the unpenalized and selected columns.
fn post_ols_residuals(x: &Standardized, y: &[f64], fit: &LassoFit) -> Vec<f64> {
    let keep: Vec<usize> = (0..x.p()).filter(|&j| !x.record.penalized[j] || fit.std_coefficients[j] != 0.0).collect();
    let n = x.n();
    let cols = keep.iter().map(|&j| (x.record.names[j].clone(), x.cols[j].to_dense(n))).collect();
    let dm = DesignMatrix::from_dense("y", y.to_vec(), cols, true);
    match ols_fit_dropping(&dm) {
        Ok(f) => f.residuals,
        Err(_) => solver::residuals(x, y, &fit.std_coefficients),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::DesignMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Standard normal CDF by composite Simpson quadrature of the density.
    fn cdf_by_quadrature(z: f64) -> f64 {
        let steps = 20_000;
        let h = z.abs() / steps as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(0.0) + pdf(z.abs());
        for i in 1..steps {
            s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let half = s * h / 3.0;
        if z >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    fn quantile_by_bisection(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf_by_quadrature(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn plugin_lambda_reference_value() {
        let cfg = LassoConfig::default();
        let got = plugin_lambda(100, 50, &cfg);
        let gamma = 0.1 / 100f64.ln();
        let oracle = 2.0 * 1.1 * 10.0 * quantile_by_bisection(1.0 - gamma / 100.0);
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
        assert!((got - 77.4).abs() < 0.05, "{got}");
    }

    #[test]
    fn plugin_lambda_monotone() {
        let cfg = LassoConfig::default();
        assert!(plugin_lambda(100, 51, &cfg) > plugin_lambda(100, 50, &cfg));
        let lo = LassoConfig { gamma: Some(0.01), ..cfg.clone() };
        let hi = LassoConfig { gamma: Some(0.05), ..cfg };
        assert!(plugin_lambda(100, 50, &lo) > plugin_lambda(100, 50, &hi));
    }

    #[test]
    fn config_validation() {
        assert!(LassoConfig { c: 1.0, ..LassoConfig::default() }.validate().is_err());
        assert!(LassoConfig { gamma: Some(1.5), ..LassoConfig::default() }.validate().is_err());
        assert!(LassoConfig { cd_tolerance: 0.0, ..LassoConfig::default() }.validate().is_err());
    }

    fn gaussian_design(seed: u64, n: usize, p: usize, noise: f64) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<(String, Vec<f64>)> =
            (0..p).map(|j| (format!("x{j}"), (0..n).map(|_| rng.sample(StandardNormal)).collect())).collect();
        let y = (0..n).map(|i| cols[0].1[i] + noise * rng.sample::<f64, _>(StandardNormal)).collect();
        DesignMatrix::from_dense("y", y, cols, true)
    }

    #[test]
    fn single_iteration_uses_demeaned_response() {
        let dm = gaussian_design(11, 60, 5, 1.0);
        let x = Standardized::all(&dm, &[true; 5]).unwrap();
        let cfg = LassoConfig { max_loading_iterations: 1, ..LassoConfig::default() };
        let fit = rlasso(&x, &dm.y, &cfg).unwrap();
        let mean = dm.y.iter().sum::<f64>() / 60.0;
        for j in 0..5 {
            let z = x.solver_column(j);
            let psi = (z.iter().zip(&dm.y).map(|(a, y)| a * a * (y - mean).powi(2)).sum::<f64>() / 60.0).sqrt();
            assert!((fit.loadings.values[j] - psi).abs() < 1e-12);
        }
        assert_eq!(fit.loading_iterations, 1);
    }

    #[test]
    fn zero_residuals_hit_positivity_guard() {
        let dm =
            DesignMatrix::from_dense("y", vec![2.0; 10], vec![("x".into(), (0..10).map(f64::from).collect())], true);
        let x = Standardized::all(&dm, &[true]).unwrap();
        assert_eq!(rlasso(&x, &dm.y, &LassoConfig::default()), Err(LassoError::ZeroLoading("x".into())));
    }

    #[test]
    fn loadings_near_one_for_unit_homoskedastic_noise() {
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cols: Vec<(String, Vec<f64>)> =
            (0..5).map(|j| (format!("x{j}"), (0..n).map(|_| rng.sample(StandardNormal)).collect())).collect();
        let eps: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let dm = DesignMatrix::from_dense("y", eps.clone(), cols, true);
        let x = Standardized::all(&dm, &[true; 5]).unwrap();
        let psi = penalty_loadings(&x, &eps).unwrap();
        assert!(psi.values.iter().all(|v| (v - 1.0).abs() < 0.1), "{:?}", psi.values);
    }

    #[test]
    fn robust_lasso_selects_the_signal() {
        let dm = gaussian_design(13, 400, 40, 0.5);
        let x = Standardized::all(&dm, &[true; 40]).unwrap();
        for refresh in [LoadingsRefresh::LassoResiduals, LoadingsRefresh::PostOls] {
            let fit = rlasso(&x, &dm.y, &LassoConfig { refresh, ..LassoConfig::default() }).unwrap();
            assert_eq!(fit.active, ["x0"], "{refresh:?}");
            assert!(fit.loadings_converged);
            assert!(fit.kkt_max_violation < 1e-6);
        }
    }

    #[test]
    fn report_serializes() {
        let dm = gaussian_design(14, 100, 4, 0.5);
        let x = Standardized::all(&dm, &[true; 4]).unwrap();
        let fit = rlasso(&x, &dm.y, &LassoConfig::default()).unwrap();
        let json = serde_json::to_string(&fit.report()).unwrap();
        let back: LassoReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fit.report());
    }
}
