use super::{LassoConfig, LassoFit, PenaltyLoadings, Standardized};
use crate::regress::Values;

/// Residual `r_i = stored_i + shift`. Sparse column updates touch only their
/// nonzero rows and move the centering contribution into `shift`.
struct Residual {
    stored: Vec<f64>,
    shift: f64,
    sum_stored: f64,
}

impl Residual {
    fn new(x: &Standardized, y_centered: &[f64], beta: &[f64]) -> Self {
        let mut r = Residual { stored: y_centered.to_vec(), shift: 0.0, sum_stored: y_centered.iter().sum() };
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                r.subtract(x, j, b);
            }
        }
        r
    }

    /// `r -= delta * z_j`.
    fn subtract(&mut self, x: &Standardized, j: usize, delta: f64) {
        let m = x.record.center[j];
        let s = x.record.scale[j];
        match x.cols[j] {
            Values::Dense(v) => {
                let mut acc = 0.0;
                for (r, xi) in self.stored.iter_mut().zip(v) {
                    let d = delta * (xi - m) / s;
                    *r -= d;
                    acc += d;
                }
                self.sum_stored -= acc;
            }
            Values::Indicator(idx) => {
                let d = delta / s;
                for &i in idx {
                    self.stored[i as usize] -= d;
                }
                self.sum_stored -= d * idx.len() as f64;
                self.shift += delta * m / s;
            }
        }
    }

    /// `sum_i z_ij r_i`.
    fn dot(&self, x: &Standardized, j: usize) -> f64 {
        let m = x.record.center[j];
        let s = x.record.scale[j];
        let xr = match x.cols[j] {
            Values::Dense(v) => v.iter().zip(&self.stored).map(|(a, b)| a * b).sum::<f64>(),
            Values::Indicator(idx) => idx.iter().map(|&i| self.stored[i as usize]).sum::<f64>(),
        } + self.shift * x.col_sum[j];
        let sum_r = self.sum_stored + x.n as f64 * self.shift;
        (xr - m * sum_r) / s
    }

    fn materialize(&self) -> Vec<f64> {
        self.stored.iter().map(|r| r + self.shift).collect()
    }

    fn sum_sq(&self) -> f64 {
        self.stored.iter().map(|r| (r + self.shift).powi(2)).sum()
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub(crate) fn objective(x: &Standardized, rss: f64, lambda: f64, loadings: &PenaltyLoadings, beta: &[f64]) -> f64 {
    let n = x.n as f64;
    let pen: f64 = beta
        .iter()
        .enumerate()
        .filter(|(j, _)| x.record.penalized[*j])
        .map(|(j, b)| loadings.values[j] * b.abs())
        .sum();
    rss / (2.0 * n) + lambda / n * pen
}

/// Minimizes `(1/2n)|y - b0 - Z b|^2 + (lambda/n) sum_j psi_j |b_j|` over the
/// penalized columns of `x` (unpenalized columns carry no penalty). The
/// intercept is profiled out by centering. Coordinates are visited in
/// column order; after each full pass the solver iterates over the nonzero
/// coordinates until they settle, then confirms with another full pass.
pub fn coordinate_descent(
    x: &Standardized,
    y: &[f64],
    lambda: f64,
    loadings: &PenaltyLoadings,
    cfg: &LassoConfig,
    warm_start: Option<&[f64]>,
) -> LassoFit {
    let n = x.n as f64;
    let p = x.p();
    let y_mean = y.iter().sum::<f64>() / n;
    let y_centered: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut beta = warm_start.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let thresholds: Vec<f64> =
        (0..p).map(|j| if x.record.penalized[j] { lambda * loadings.values[j] / n } else { 0.0 }).collect();

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let sweep = |coords: &mut dyn Iterator<Item = usize>, beta: &mut [f64], r: &mut Residual| -> f64 {
        let mut max_change = 0.0f64;
        for j in coords {
            let v = x.sq_mean[j];
            let rho = r.dot(x, j) / n + v * beta[j];
            let new = soft_threshold(rho, thresholds[j]) / v;
            let delta = new - beta[j];
            if delta != 0.0 {
                r.subtract(x, j, delta);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    };

    'outer: while iterations < cfg.cd_max_iterations {
        // fresh residual each full pass keeps incremental drift bounded
        let mut r = Residual::new(x, &y_centered, &beta);
        let change = sweep(&mut (0..p), &mut beta, &mut r);
        iterations += 1;
        history.push(objective(x, r.sum_sq(), lambda, loadings, &beta));
        if change < cfg.cd_tolerance {
            converged = true;
            break;
        }
        loop {
            if iterations >= cfg.cd_max_iterations {
                break 'outer;
            }
            let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
            let change = sweep(&mut active.into_iter(), &mut beta, &mut r);
            iterations += 1;
            history.push(objective(x, r.sum_sq(), lambda, loadings, &beta));
            if change < cfg.cd_tolerance {
                break;
            }
        }
    }
    if !converged {
        log::warn!("coordinate descent stopped at the iteration cap ({iterations})");
    }

    let (intercept, coefficients) = x.record.to_original(y_mean, &beta);
    let objective_value = *history.last().unwrap_or(&f64::NAN);
    let mut fit = LassoFit {
        names: x.record.names.clone(),
        coefficients,
        std_coefficients: beta,
        intercept,
        active: Vec::new(),
        penalized: x.record.penalized.clone(),
        lambda,
        loadings: loadings.clone(),
        objective: objective_value,
        objective_history: history,
        iterations,
        converged,
        kkt_max_violation: 0.0,
        loading_iterations: 0,
        loading_change: 0.0,
        loadings_converged: true,
    };
    fit.active = fit.active_indices().into_iter().map(|j| fit.names[j].clone()).collect();
    fit.kkt_max_violation = kkt_check(&fit, x, y);
    fit
}

/// Largest violation of the optimality conditions of `fit` on `(x, y)`.
pub fn kkt_check(fit: &LassoFit, x: &Standardized, y: &[f64]) -> f64 {
    let n = x.n as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let y_centered: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let r = Residual::new(x, &y_centered, &fit.std_coefficients).materialize();
    (0..x.p())
        .map(|j| {
            let g = x.dot(j, &r) / n;
            let b = fit.std_coefficients[j];
            if !x.record.penalized[j] {
                g.abs()
            } else {
                let t = fit.lambda * fit.loadings.values[j] / n;
                if b != 0.0 {
                    (g - t * b.signum()).abs()
                } else {
                    (g.abs() - t).max(0.0)
                }
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest penalty level at which every penalized coefficient is zero
/// (with unpenalized columns held at zero).
pub fn lambda_max(x: &Standardized, y: &[f64], loadings: &PenaltyLoadings) -> f64 {
    let n = x.n as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let y_centered: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    (0..x.p())
        .filter(|&j| x.record.penalized[j])
        .map(|j| x.dot(j, &y_centered).abs() / loadings.values[j])
        .fold(0.0, f64::max)
}

/// LASSO residuals `y - b0 - X b` on the original scale.
pub(crate) fn residuals(x: &Standardized, y: &[f64], beta_std: &[f64]) -> Vec<f64> {
    let n = x.n as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let y_centered: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    Residual::new(x, &y_centered, beta_std).materialize()
}
