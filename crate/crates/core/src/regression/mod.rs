//! Performance-prediction models fitted on real or bootstrapped data, scored
//! by normalized RMSE.

mod forest;
mod lasso;
mod linear;

pub use forest::{fit_random_forest, ForestConfig, ForestModel};
pub use lasso::{fit_lasso_path, LassoPath};
pub use linear::{fit_linear, LinearModel};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// A plain regression dataset: raw feature values, one target per row.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
    feature_names: Vec<String>,
}

impl RegressionDataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        targets: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<RegressionDataset> {
        if feature_names.is_empty() {
            return Err(Error::Data("dataset needs at least one feature".into()));
        }
        if features.len() != targets.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} targets",
                features.len(),
                targets.len()
            )));
        }
        let p = feature_names.len();
        for (i, row) in features.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Data(format!(
                    "row {} has {} features, expected {p}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite feature in row {}", i + 1)));
            }
        }
        if let Some(bad) = targets.iter().find(|t| !t.is_finite()) {
            return Err(Error::Data(format!("non-finite target {bad}")));
        }
        Ok(RegressionDataset {
            features,
            targets,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Seeded shuffle split; `test_fraction` of the rows (rounded down, at
    /// least one row on each side for non-trivial datasets) go to the second
    /// returned dataset.
    pub fn train_test_split(
        &self,
        test_fraction: f64,
        seed: u64,
    ) -> Result<(RegressionDataset, RegressionDataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::Config(format!(
                "test fraction must lie in [0, 1), got {test_fraction}"
            )));
        }
        let n = self.n_samples();
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            indices.swap(i, rng.gen_range(0..=i));
        }
        let mut n_test = ((n as f64) * test_fraction) as usize;
        if test_fraction > 0.0 && n >= 2 {
            n_test = n_test.clamp(1, n - 1);
        }
        let (test_idx, train_idx) = indices.split_at(n_test);
        let subset = |idx: &[usize]| RegressionDataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            feature_names: self.feature_names.clone(),
        };
        Ok((subset(train_idx), subset(test_idx)))
    }
}

/// Root mean squared prediction error divided by the mean prediction:
/// `sqrt(mean((actual - predicted)^2)) / mean(predicted)`.
pub fn normalized_rmse(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != actuals.len() {
        return Err(Error::Argument(format!(
            "prediction and actual lengths must match and be nonzero, got {} and {}",
            predictions.len(),
            actuals.len()
        )));
    }
    let n = predictions.len() as f64;
    let mean_pred = predictions.iter().sum::<f64>() / n;
    if !(mean_pred.abs() > 1e-300) {
        return Err(Error::Data(
            "normalized RMSE is undefined: mean prediction is zero".into(),
        ));
    }
    let mse = predictions
        .iter()
        .zip(actuals)
        .map(|(p, a)| (a - p) * (a - p))
        .sum::<f64>()
        / n;
    Ok(mse.sqrt() / mean_pred)
}

/// Column means of a feature matrix.
pub(crate) fn column_means(features: &[Vec<f64>], p: usize) -> Vec<f64> {
    let n = features.len() as f64;
    let mut means = vec![0.0; p];
    for row in features {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    means
}
