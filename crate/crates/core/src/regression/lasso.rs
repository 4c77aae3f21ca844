//! Cyclic coordinate-descent LASSO along a log-spaced regularization path.
//!
//! Features are standardized (zero mean, unit variance) and targets centered
//! internally; coefficients are reported back on the raw feature scale. The
//! path starts at `lambda_max = max_j |x_j . y| / n`, the smallest penalty
//! that zeroes every coefficient, and descends to `lambda_max * 1e-4` with
//! warm starts.

use crate::error::{Error, Result};
use crate::regression::{column_means, RegressionDataset};

const PATH_SPAN: f64 = 1e-4;
const SWEEP_TOLERANCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct LassoPath {
    /// Penalty grid, stored ascending.
    pub lambdas: Vec<f64>,
    /// Raw-scale coefficient vectors aligned with `lambdas`.
    pub coefficients: Vec<Vec<f64>>,
    /// Standardized-scale coefficient vectors aligned with `lambdas`.
    pub standardized_coefficients: Vec<Vec<f64>>,
    /// Intercepts (raw scale) aligned with `lambdas`.
    pub intercepts: Vec<f64>,
    /// Feature indices ordered first-to-collapse ... last-to-collapse as the
    /// penalty grows.
    pub collapse_order: Vec<usize>,
    pub feature_names: Vec<String>,
}

impl LassoPath {
    /// Coefficients at the smallest penalty (the de facto OLS end of the path).
    pub fn endpoint(&self) -> (&[f64], f64) {
        (&self.coefficients[0], self.intercepts[0])
    }
}

pub fn fit_lasso_path(data: &RegressionDataset, n_lambdas: usize) -> Result<LassoPath> {
    if n_lambdas < 2 {
        return Err(Error::Config(format!(
            "the path needs at least 2 penalty values, got {n_lambdas}"
        )));
    }
    let n = data.n_samples();
    let p = data.n_features();
    if n < 2 {
        return Err(Error::Data(format!("LASSO needs at least 2 rows, got {n}")));
    }

    // Standardize columns; constant columns get unit scale and stay zero.
    let means = column_means(data.features(), p);
    let mut stds = vec![0.0; p];
    for row in data.features() {
        for j in 0..p {
            let d = row[j] - means[j];
            stds[j] += d * d;
        }
    }
    for s in &mut stds {
        *s = (*s / n as f64).sqrt();
        if *s <= 0.0 {
            *s = 1.0;
        }
    }
    let x: Vec<Vec<f64>> = data
        .features()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, v)| (v - means[j]) / stds[j])
                .collect()
        })
        .collect();
    let y_mean = data.targets().iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = data.targets().iter().map(|t| t - y_mean).collect();

    let column_dot = |j: usize, v: &[f64]| -> f64 {
        x.iter().zip(v).map(|(row, vi)| row[j] * vi).sum::<f64>() / n as f64
    };
    let lambda_max = (0..p)
        .map(|j| column_dot(j, &y).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);

    // Descending log-spaced grid from lambda_max to lambda_max * PATH_SPAN.
    let ratio = PATH_SPAN.powf(1.0 / (n_lambdas - 1) as f64);
    let grid_desc: Vec<f64> = (0..n_lambdas)
        .map(|i| lambda_max * ratio.powi(i as i32))
        .collect();

    let mut beta = vec![0.0; p];
    let mut residual = y.clone();
    let mut path_desc: Vec<Vec<f64>> = Vec::with_capacity(n_lambdas);

    for &lambda in &grid_desc {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut max_change = 0.0f64;
            for j in 0..p {
                let old = beta[j];
                // Unit-variance columns make the coordinate update a plain
                // soft threshold.
                let rho = column_dot(j, &residual) + old;
                let new = soft_threshold(rho, lambda);
                if new != old {
                    let delta = new - old;
                    for (r, row) in residual.iter_mut().zip(&x) {
                        *r -= delta * row[j];
                    }
                    beta[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < SWEEP_TOLERANCE {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "coordinate descent did not converge at lambda={lambda:.6e}"
            )));
        }
        path_desc.push(beta.clone());
    }

    // Collapse order: a feature's activation penalty is the largest lambda
    // at which it is nonzero; features that activate later collapse earlier.
    let activation: Vec<Option<usize>> = (0..p)
        .map(|j| path_desc.iter().position(|b| b[j] != 0.0))
        .collect();
    let mut collapse_order: Vec<usize> = (0..p).collect();
    collapse_order.sort_by_key(|&j| {
        // Never-active features collapse first; then later activations.
        (std::cmp::Reverse(activation[j].unwrap_or(usize::MAX)), j)
    });

    // Store ascending and translate back to the raw feature scale.
    let mut lambdas: Vec<f64> = grid_desc.clone();
    lambdas.reverse();
    path_desc.reverse();
    let standardized_coefficients = path_desc;
    let mut coefficients = Vec::with_capacity(n_lambdas);
    let mut intercepts = Vec::with_capacity(n_lambdas);
    for b in &standardized_coefficients {
        let raw: Vec<f64> = b.iter().zip(&stds).map(|(bj, s)| bj / s).collect();
        let intercept = y_mean - raw.iter().zip(&means).map(|(r, m)| r * m).sum::<f64>();
        coefficients.push(raw);
        intercepts.push(intercept);
    }

    Ok(LassoPath {
        lambdas,
        coefficients,
        standardized_coefficients,
        intercepts,
        collapse_order,
        feature_names: data.feature_names().to_vec(),
    })
}

fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}
