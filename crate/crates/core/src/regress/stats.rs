use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::covariance::{classical_cov, cluster_cov, hc1_cov};
use super::{Clusters, CovarianceKind, DesignMatrix, DroppedColumn, OlsFit, RegressError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    pub r2: f64,
    pub adj_r2: f64,
    pub rmse: f64,
    /// `None` when the fit is perfect (SSR = 0).
    pub aic: Option<f64>,
    pub bic: Option<f64>,
}

/// Goodness-of-fit summary for `n` observations and `k` coefficients
/// (intercept included). AIC/BIC use the Gaussian log-likelihood with
/// `k + 1` parameters.
pub fn fit_stats(ssr: f64, tss: f64, n: usize, k: usize) -> Result<FitStats, RegressError> {
    if n <= k {
        return Err(RegressError::TooFewObservations { n, k });
    }
    let (nf, kf) = (n as f64, k as f64);
    let r2 = if tss > 0.0 { 1.0 - ssr / tss } else { f64::NAN };
    let adj_r2 = 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - kf);
    let rmse = (ssr / (nf - kf)).sqrt();
    let (aic, bic) = if ssr > 0.0 {
        let base = nf * (1.0 + (2.0 * std::f64::consts::PI).ln()) + nf * (ssr / nf).ln();
        (Some(base + 2.0 * (kf + 1.0)), Some(base + nf.ln() * (kf + 1.0)))
    } else {
        (None, None)
    };
    Ok(FitStats { r2, adj_r2, rmse, aic, bic })
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<Coefficient>,
    /// Row-major `k x k` covariance in coefficient order.
    pub covariance: Vec<Vec<f64>>,
    pub covariance_kind: CovarianceKind,
    pub ssr: f64,
    pub tss: f64,
    pub n: usize,
    pub k: usize,
    /// Number of clusters when the covariance is clustered.
    pub clusters: Option<usize>,
    /// Degrees of freedom of the reference t distribution.
    pub df: f64,
    pub stats: FitStats,
    pub dropped: Vec<DroppedColumn>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Standard errors, t statistics and p-values for an OLS fit. Clustered
/// p-values use `G - 1` degrees of freedom, the others `n - k`.
pub fn infer(
    dm: &DesignMatrix,
    fit: &OlsFit,
    kind: CovarianceKind,
    clusters: Option<&Clusters>,
) -> Result<FitResult, RegressError> {
    let stats = fit_stats(fit.ssr, fit.tss, fit.n, fit.k)?;
    let (cov, g) = match kind {
        CovarianceKind::Classical => (classical_cov(fit), None),
        CovarianceKind::Hc1 => (hc1_cov(dm, fit), None),
        CovarianceKind::Cluster(adj) => {
            let cl = clusters.ok_or(RegressError::TooFewClusters(0))?;
            (cluster_cov(dm, fit, cl, adj)?, Some(cl.count()))
        }
    };
    let df = match g {
        Some(g) => (g - 1) as f64,
        None => (fit.n - fit.k) as f64,
    };
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let coefficients = fit
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let estimate = fit.coefficients[j];
            let se = cov[(j, j)].max(0.0).sqrt();
            let t = estimate / se;
            let p = if t.is_finite() {
                2.0 * dist.sf(t.abs())
            } else if t.is_nan() {
                f64::NAN
            } else {
                0.0
            };
            Coefficient { name: name.clone(), estimate, se, t, p }
        })
        .collect();
    Ok(FitResult {
        coefficients,
        covariance: (0..fit.k).map(|i| (0..fit.k).map(|j| cov[(i, j)]).collect()).collect(),
        covariance_kind: kind,
        ssr: fit.ssr,
        tss: fit.tss,
        n: fit.n,
        k: fit.k,
        clusters: g,
        df,
        stats,
        dropped: fit.dropped.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::ols_fit;

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.004), "***");
        assert_eq!(significance_stars(0.03), "**");
        assert_eq!(significance_stars(0.07), "*");
        assert_eq!(significance_stars(0.5), "");
        assert_eq!(significance_stars(0.01), "**");
    }

    #[test]
    fn perfect_fit_has_no_aic() {
        let s = fit_stats(0.0, 10.0, 10, 2).unwrap();
        assert_eq!(s.r2, 1.0);
        assert_eq!(s.rmse, 0.0);
        assert!(s.aic.is_none() && s.bic.is_none());
        assert!(fit_stats(1.0, 2.0, 3, 3).is_err());
    }

    #[test]
    fn aic_from_published_rmse() {
        let (n, k, rmse) = (15_634usize, 8usize, 0.7039f64);
        let ssr = rmse * rmse * (n - k) as f64;
        let aic = fit_stats(ssr, 2.0 * ssr, n, k).unwrap().aic.unwrap();
        assert!((aic - 33_398.0).abs() <= 25.0, "{aic}");
    }

    #[test]
    fn bic_minus_aic() {
        let s = fit_stats(3.7, 9.0, 50, 4).unwrap();
        let d = s.bic.unwrap() - s.aic.unwrap();
        assert!((d - (50f64.ln() - 2.0) * 5.0).abs() < 1e-9);
    }

    /// Brute-force oracle: every statistic from the raw definitions with
    /// explicit loops, coefficients from the 2x2 normal equations.
    #[test]
    fn hundred_observation_oracle() {
        let n = 100;
        let x: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let y: Vec<f64> = (0..n).map(|i| 1.5 + 0.3 * x[i] + (((i * 53) % 17) as f64 - 8.0) / 7.0).collect();
        let dm = DesignMatrix::from_dense("y", y.clone(), vec![("x".into(), x.clone())], true);
        let fit = ols_fit(&dm).unwrap();
        let got = fit_stats(fit.ssr, fit.tss, fit.n, fit.k).unwrap();

        let nf = n as f64;
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let b = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
        let a = (sy - b * sx) / nf;
        let mut ssr = 0.0;
        let mut tss = 0.0;
        for i in 0..n {
            ssr += (y[i] - a - b * x[i]).powi(2);
            tss += (y[i] - sy / nf).powi(2);
        }
        let loglik = -0.5 * nf * ((2.0 * std::f64::consts::PI).ln() + (ssr / nf).ln() + 1.0);
        let r2 = 1.0 - ssr / tss;
        assert!((got.r2 - r2).abs() < 1e-8);
        assert!((got.adj_r2 - (1.0 - (1.0 - r2) * (nf - 1.0) / (nf - 2.0))).abs() < 1e-8);
        assert!((got.rmse - (ssr / (nf - 2.0)).sqrt()).abs() < 1e-8);
        assert!((got.aic.unwrap() - (-2.0 * loglik + 2.0 * 3.0)).abs() < 1e-8);
        assert!((got.bic.unwrap() - (-2.0 * loglik + nf.ln() * 3.0)).abs() < 1e-8);
    }

    #[test]
    fn classical_inference_on_small_fixture() {
        let dm =
            DesignMatrix::from_dense("y", vec![1.0, 2.0, 2.0, 4.0], vec![("x".into(), vec![0.0, 1.0, 2.0, 3.0])], true);
        let fit = ols_fit(&dm).unwrap();
        let r = infer(&dm, &fit, CovarianceKind::Classical, None).unwrap();
        // slope 0.9, SSR 0.7, s^2 = 0.35, Sxx = 5 -> se = sqrt(0.07)
        let c = r.get("x").unwrap();
        assert!((c.estimate - 0.9).abs() < 1e-12);
        assert!((c.se - 0.07f64.sqrt()).abs() < 1e-12);
        assert!(c.p > 0.05 && c.p < 0.10);
        assert_eq!(r.df, 2.0);
    }
}
