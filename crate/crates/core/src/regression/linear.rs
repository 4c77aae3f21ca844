//! Ordinary least squares via a QR factorization of the centered design
//! matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::regression::{column_means, RegressionDataset};

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Vec<f64> {
        features.iter().map(|r| self.predict_row(r)).collect()
    }
}

pub fn fit_linear(data: &RegressionDataset) -> Result<LinearModel> {
    let n = data.n_samples();
    let p = data.n_features();
    if n < p {
        return Err(Error::Data(format!(
            "linear fit needs at least as many rows ({n}) as features ({p})"
        )));
    }

    let x_means = column_means(data.features(), p);
    let y_mean = data.targets().iter().sum::<f64>() / n as f64;

    let centered = DMatrix::from_fn(n, p, |i, j| data.features()[i][j] - x_means[j]);
    let y = DVector::from_fn(n, |i, _| data.targets()[i] - y_mean);

    let qr = centered.clone().qr();
    let r = qr.r();
    // A vanishing diagonal entry of R marks a column that is (numerically)
    // a linear combination of the ones before it.
    let scale = r
        .diagonal()
        .iter()
        .fold(0.0f64, |acc, d| acc.max(d.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = scale * 1e-10 * (n.max(p) as f64);
    let collinear: Vec<&str> = (0..p)
        .filter(|&j| r[(j, j)].abs() <= tol)
        .map(|j| data.feature_names()[j].as_str())
        .collect();
    if !collinear.is_empty() {
        return Err(Error::Data(format!(
            "singular fit: collinear or constant columns {collinear:?}"
        )));
    }

    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Numerical("upper-triangular solve failed".into()))?;

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_means)
            .map(|(b, m)| b * m)
            .sum::<f64>();

    Ok(LinearModel {
        intercept,
        coefficients,
        feature_names: data.feature_names().to_vec(),
    })
}
