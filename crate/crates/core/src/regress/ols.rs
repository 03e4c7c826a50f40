use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DesignMatrix, RegressError};

/// Name given to the implicit constant column.
pub const INTERCEPT: &str = "_cons";

/// Relative residual norm below which a column counts as linearly dependent
/// on the columns accepted before it.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: String,
    pub dependent_on: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Coefficient names in fit order, `_cons` first when present.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Design column behind each coefficient; `None` for the intercept.
    pub used: Vec<Option<usize>>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub tss: f64,
    pub n: usize,
    pub k: usize,
    /// Inverse of the triangular factor; `(X'X)^-1 = r_inv * r_inv'`.
    pub r_inv: DMatrix<f64>,
    pub dropped: Vec<DroppedColumn>,
}

impl OlsFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    /// `(X'X)^-1`.
    pub fn xtx_inv(&self) -> DMatrix<f64> {
        &self.r_inv * self.r_inv.transpose()
    }
}

/// Least squares via Householder QR; fails on the first column that is a
/// linear combination of earlier ones.
pub fn ols_fit(dm: &DesignMatrix) -> Result<OlsFit, RegressError> {
    fit(dm, false)
}

/// Like [`ols_fit`], but drops dependent columns (later-declared loses) and
/// records them in [`OlsFit::dropped`].
pub fn ols_fit_dropping(dm: &DesignMatrix) -> Result<OlsFit, RegressError> {
    fit(dm, true)
}

pub(crate) fn dense_column(dm: &DesignMatrix, which: Option<usize>) -> Vec<f64> {
    match which {
        None => vec![1.0; dm.n()],
        Some(j) => dm.columns[j].values.to_dense(dm.n()),
    }
}

fn column_name(dm: &DesignMatrix, which: Option<usize>) -> String {
    which.map_or_else(|| INTERCEPT.to_string(), |j| dm.columns[j].name.clone())
}

struct Reflector {
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    /// Applies `I - tau v v'` to `x[offset..]`.
    fn apply(&self, x: &mut [f64], offset: usize) {
        let tail = &mut x[offset..];
        let d: f64 = self.v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
        let s = self.tau * d;
        for (t, v) in tail.iter_mut().zip(&self.v) {
            *t -= s * v;
        }
    }
}

fn fit(dm: &DesignMatrix, drop: bool) -> Result<OlsFit, RegressError> {
    let n = dm.n();
    let candidates: Vec<Option<usize>> =
        dm.intercept.then_some(None).into_iter().chain((0..dm.columns.len()).map(Some)).collect();

    let mut reflectors: Vec<Reflector> = Vec::new();
    // r_cols[j] holds column j of R (length j+1)
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut used = Vec::new();
    let mut dropped = Vec::new();

    for &cand in &candidates {
        let mut x = dense_column(dm, cand);
        let norm0 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rank = reflectors.len();
        for (r, h) in reflectors.iter().enumerate() {
            h.apply(&mut x, r);
        }
        let tail_norm = if rank < n { x[rank..].iter().map(|a| a * a).sum::<f64>().sqrt() } else { 0.0 };
        if tail_norm <= RANK_TOL * norm0.max(f64::MIN_POSITIVE) {
            let coef = solve_upper(&r_cols, &x[..rank]);
            let scale = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let dependent_on: Vec<String> = coef
                .iter()
                .zip(&used)
                .filter(|(c, _)| c.abs() > 1e-6 * scale)
                .map(|(_, &u)| column_name(dm, u))
                .collect();
            let column = column_name(dm, cand);
            if !drop {
                return Err(RegressError::RankDeficient { column, dependent_on });
            }
            log::info!("ols: dropping `{column}` (collinear with {})", dependent_on.join(", "));
            dropped.push(DroppedColumn { column, dependent_on });
            continue;
        }
        let alpha = if x[rank] > 0.0 { -tail_norm } else { tail_norm };
        let mut v = x[rank..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|a| a * a).sum();
        let mut rc = x[..rank].to_vec();
        rc.push(alpha);
        r_cols.push(rc);
        reflectors.push(Reflector { v, tau: 2.0 / vv });
        used.push(cand);
    }

    let k = used.len();
    if n <= k {
        return Err(RegressError::TooFewObservations { n, k });
    }

    let mut qty = dm.y.clone();
    for (r, h) in reflectors.iter().enumerate() {
        h.apply(&mut qty, r);
    }
    let coefficients = solve_upper(&r_cols, &qty[..k]);

    let mut fitted = vec![0.0; n];
    for (&u, &b) in used.iter().zip(&coefficients) {
        match u {
            None => fitted.iter_mut().for_each(|f| *f += b),
            Some(j) => match &dm.columns[j].values {
                super::Values::Dense(v) => fitted.iter_mut().zip(v).for_each(|(f, x)| *f += b * x),
                super::Values::Indicator(idx) => idx.iter().for_each(|&i| fitted[i as usize] += b),
            },
        }
    }
    let residuals: Vec<f64> = dm.y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let ssr = residuals.iter().map(|u| u * u).sum();
    let center = if dm.intercept { dm.y.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let tss = dm.y.iter().map(|y| (y - center).powi(2)).sum();

    let mut r_inv = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = solve_upper(&r_cols, &e);
        for i in 0..=j {
            r_inv[(i, j)] = col[i];
        }
    }

    Ok(OlsFit {
        names: used.iter().map(|&u| column_name(dm, u)).collect(),
        coefficients,
        used,
        residuals,
        ssr,
        tss,
        n,
        k,
        r_inv,
        dropped,
    })
}

/// Back substitution with the column-stored upper-triangular factor.
fn solve_upper(r_cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = b.len();
    let mut x = b.to_vec();
    for j in (0..m).rev() {
        x[j] /= r_cols[j][j];
        let xj = x[j];
        for i in 0..j {
            x[i] -= r_cols[j][i] * xj;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_without_noise() {
        let x: Vec<f64> = (1..=6).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let dm = DesignMatrix::from_dense("y", y, vec![("x".into(), x)], false);
        let f = ols_fit(&dm).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-12);
        assert!(f.ssr < 1e-20);
    }

    #[test]
    fn three_point_fixture() {
        // normal equations: [3 3; 3 5] b = [5; 6] => slope 1/2, intercept 7/6
        let dm = DesignMatrix::from_dense("y", vec![1.0, 2.0, 2.0], vec![("x".into(), vec![0.0, 1.0, 2.0])], true);
        let f = ols_fit(&dm).unwrap();
        assert_eq!(f.names, ["_cons", "x"]);
        assert!((f.coefficients[0] - 7.0 / 6.0).abs() < 1e-12);
        assert!((f.coefficients[1] - 0.5).abs() < 1e-12);
        assert!((f.ssr - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_names_both() {
        let x = vec![0.3, 1.0, 2.5, 4.0];
        let dm = DesignMatrix::from_dense(
            "y",
            vec![1.0, 2.0, 0.0, 3.0],
            vec![("a".into(), x.clone()), ("b".into(), x)],
            true,
        );
        match ols_fit(&dm) {
            Err(RegressError::RankDeficient { column, dependent_on }) => {
                assert_eq!(column, "b");
                assert_eq!(dependent_on, ["a"]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let f = ols_fit_dropping(&dm).unwrap();
        assert_eq!(f.names, ["_cons", "a"]);
        assert_eq!(f.dropped[0].column, "b");
    }

    #[test]
    fn dependent_on_several_columns() {
        let a = vec![1.0, 0.0, 0.0, 1.0, 0.0];
        let b = vec![0.0, 1.0, 1.0, 0.0, 0.0];
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let dm = DesignMatrix::from_dense(
            "y",
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![("a".into(), a), ("b".into(), b), ("c".into(), c)],
            true,
        );
        match ols_fit(&dm) {
            Err(RegressError::RankDeficient { column, dependent_on }) => {
                assert_eq!(column, "c");
                assert_eq!(dependent_on, ["a", "b"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn xtx_inverse_matches_direct_inverse() {
        let x1 = vec![1.0, 2.0, 4.0, 3.0, 7.0];
        let x2 = vec![0.5, -1.0, 2.0, 0.0, 1.0];
        let dm = DesignMatrix::from_dense(
            "y",
            vec![1.0, 3.0, 2.0, 5.0, 4.0],
            vec![("a".into(), x1.clone()), ("b".into(), x2.clone())],
            true,
        );
        let f = ols_fit(&dm).unwrap();
        let x = DMatrix::from_fn(5, 3, |i, j| match j {
            0 => 1.0,
            1 => x1[i],
            _ => x2[i],
        });
        let direct = (x.transpose() * &x).try_inverse().unwrap();
        assert!((f.xtx_inv() - direct).abs().max() < 1e-10);
    }

    #[test]
    fn too_few_observations() {
        let dm = DesignMatrix::from_dense("y", vec![1.0, 2.0], vec![("x".into(), vec![0.0, 1.0])], true);
        assert!(matches!(ols_fit(&dm), Err(RegressError::TooFewObservations { n: 2, k: 2 })));
    }
}
