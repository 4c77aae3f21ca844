//! Gaussian-process surrogate models over discrete design spaces.
//!
//! Inputs are min-max normalized into the unit hypercube using the design
//! space bounds; observations are standardized to zero mean and unit
//! variance. The kernel has unit signal variance, so the de-standardized
//! prior variance at a point far from all training data is `y_std^2`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{build_covariance, build_covariance_symmetric, KernelSpec};
use crate::space::{DesignSpace, Direction, ParameterVector};

/// Jitter escalation: start at `1e-8 * trace / n`, multiply by 10 until the
/// factorization succeeds or the ceiling is passed.
const JITTER_CEILING: f64 = 1e-2;

/// A fitted Gaussian-process surrogate. Immutable after fitting; safe for
/// concurrent reads.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub(crate) name: String,
    pub(crate) kernel: KernelSpec,
    pub(crate) direction: Direction,
    pub(crate) noise_variance: f64,
    /// Raw (min, max) per dimension, from the design space the model was fit on.
    pub(crate) bounds: Vec<(f64, f64)>,
    /// Training inputs, normalized to the unit hypercube.
    pub(crate) x_train: Vec<Vec<f64>>,
    /// Training observations, standardized.
    pub(crate) y_train: Vec<f64>,
    pub(crate) y_mean: f64,
    pub(crate) y_std: f64,
    /// Jitter that made the factorization succeed.
    pub(crate) jitter: f64,
    /// Lower-triangular Cholesky factor of K + (noise + jitter) I.
    pub(crate) chol: DMatrix<f64>,
    /// (K + (noise + jitter) I)^-1 y, standardized scale.
    pub(crate) alpha: DVector<f64>,
}

impl GpModel {
    /// Fits a GP to raw design points and observations.
    ///
    /// Duplicate points are collapsed to a single row; conflicting
    /// observations at the same point are averaged with a warning.
    pub fn fit(
        space: &DesignSpace,
        xs: &[ParameterVector],
        ys: &[f64],
        kernel: KernelSpec,
        noise_variance: f64,
        direction: Direction,
    ) -> Result<GpModel> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Argument(format!(
                "training set must be non-empty with matching lengths, got {} points and {} observations",
                xs.len(),
                ys.len()
            )));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::Config(format!(
                "noise variance must be finite and nonnegative, got {noise_variance}"
            )));
        }
        if let Some(bad) = ys.iter().find(|y| !y.is_finite()) {
            return Err(Error::Data(format!("non-finite observation {bad}")));
        }

        // Collapse duplicate design points, averaging their observations.
        let mut order: Vec<ParameterVector> = Vec::new();
        let mut grouped: std::collections::HashMap<crate::space::PointKey, Vec<f64>> =
            std::collections::HashMap::new();
        for (x, &y) in xs.iter().zip(ys) {
            let key = x.key();
            let entry = grouped.entry(key).or_insert_with(|| {
                order.push(x.clone());
                Vec::new()
            });
            entry.push(y);
        }
        let mut clean_x = Vec::with_capacity(order.len());
        let mut clean_y = Vec::with_capacity(order.len());
        for x in order {
            let obs = &grouped[&x.key()];
            if obs.len() > 1 && obs.iter().any(|v| *v != obs[0]) {
                log::warn!(
                    "averaging {} conflicting observations at design point {x}",
                    obs.len()
                );
            }
            clean_x.push(x);
            clean_y.push(obs.iter().sum::<f64>() / obs.len() as f64);
        }

        let n = clean_x.len();
        let y_mean = clean_y.iter().sum::<f64>() / n as f64;
        let var = clean_y.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n as f64;
        let mut y_std = var.sqrt();
        if y_std <= 1e-12 * y_mean.abs().max(1.0) {
            y_std = 1.0;
        }
        let y_standardized: Vec<f64> = clean_y.iter().map(|y| (y - y_mean) / y_std).collect();

        let x_norm = clean_x
            .iter()
            .map(|x| space.normalize(x))
            .collect::<Result<Vec<_>>>()?;

        let k = build_covariance_symmetric(&kernel, &x_norm);
        let (chol, jitter) = factorize_with_jitter(&k, noise_variance)?;
        let y_vec = DVector::from_vec(y_standardized.clone());
        let alpha = solve_cholesky(&chol, &y_vec);

        Ok(GpModel {
            name: "objective".to_string(),
            kernel,
            direction,
            noise_variance,
            bounds: space.bounds(),
            x_train: x_norm,
            y_train: y_standardized,
            y_mean,
            y_std,
            jitter,
            chol,
            alpha,
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn n_train(&self) -> usize {
        self.x_train.len()
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn y_std(&self) -> f64 {
        self.y_std
    }

    /// De-standardized prior variance far from all training data.
    pub fn prior_variance(&self) -> f64 {
        self.y_std * self.y_std
    }

    /// Jitter added to the factorized diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn normalize_queries(&self, queries: &[ParameterVector]) -> Result<Vec<Vec<f64>>> {
        queries
            .iter()
            .map(|q| {
                if q.len() != self.bounds.len() {
                    return Err(Error::Argument(format!(
                        "query has dimension {}, model has {}",
                        q.len(),
                        self.bounds.len()
                    )));
                }
                Ok(self
                    .bounds
                    .iter()
                    .zip(q.values())
                    .map(|(&(lo, hi), &v)| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
                    .collect())
            })
            .collect()
    }

    /// Posterior mean and variance at each query point, on the original
    /// observation scale. Variances are clamped at zero.
    pub fn posterior(&self, queries: &[ParameterVector]) -> Result<(Vec<f64>, Vec<f64>)> {
        let q_norm = self.normalize_queries(queries)?;
        if q_norm.is_empty() {
            return Ok((Vec::new(), Vec::new()));
        }
        let kstar = build_covariance(&self.kernel, &self.x_train, &q_norm)?;
        let mean_std = kstar.transpose() * &self.alpha;
        let v = self
            .chol
            .solve_lower_triangular(&kstar)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let means = mean_std
            .iter()
            .map(|m| self.y_mean + self.y_std * m)
            .collect();
        let variances = (0..q_norm.len())
            .map(|j| {
                let explained: f64 = v.column(j).iter().map(|x| x * x).sum();
                // The jitter inflates the factorized diagonal; remove it so a
                // noise-free training point reports exactly zero variance.
                (1.0 - explained - self.jitter).max(0.0) * self.y_std * self.y_std
            })
            .collect();
        Ok((means, variances))
    }

    /// Posterior mean vector and full posterior covariance over the query
    /// set, on the original observation scale. The covariance is
    /// symmetrized and its diagonal clamped at zero.
    pub fn posterior_joint(&self, queries: &[ParameterVector]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let q_norm = self.normalize_queries(queries)?;
        if q_norm.is_empty() {
            return Ok((Vec::new(), DMatrix::zeros(0, 0)));
        }
        let kstar = build_covariance(&self.kernel, &self.x_train, &q_norm)?;
        let mean_std = kstar.transpose() * &self.alpha;
        let v = self
            .chol
            .solve_lower_triangular(&kstar)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let kqq = build_covariance_symmetric(&self.kernel, &q_norm);
        let mut cov = kqq - v.transpose() * &v;
        let scale = self.y_std * self.y_std;
        let m = cov.nrows();
        for i in 0..m {
            for j in 0..i {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]) * scale;
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
            cov[(i, i)] = ((cov[(i, i)] - self.jitter) * scale).max(0.0);
        }
        let means = mean_std
            .iter()
            .map(|m| self.y_mean + self.y_std * m)
            .collect();
        Ok((means, cov))
    }
}

/// Factorizes `k + (noise + jitter) I`, escalating jitter by factors of 10
/// from `1e-8 * trace/n` until the Cholesky succeeds. Fails with a numerical
/// error once jitter would exceed the ceiling.
pub(crate) fn factorize_with_jitter(
    k: &DMatrix<f64>,
    noise_variance: f64,
) -> Result<(DMatrix<f64>, f64)> {
    let n = k.nrows();
    let base = (k.trace() / n as f64).abs().max(1e-6);
    let mut jitter = 1e-8 * base;
    loop {
        let mut shifted = k.clone();
        for i in 0..n {
            shifted[(i, i)] += noise_variance + jitter;
        }
        if let Some(chol) = nalgebra::Cholesky::new(shifted) {
            return Ok((chol.unpack(), jitter));
        }
        jitter *= 10.0;
        if jitter > JITTER_CEILING * base {
            return Err(Error::Numerical(format!(
                "covariance factorization failed after jitter escalation to {jitter:.3e}"
            )));
        }
    }
}

/// Solves (L L^T) x = b given the lower-triangular factor L.
pub(crate) fn solve_cholesky(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let fwd = l
        .solve_lower_triangular(b)
        .expect("factor has positive diagonal");
    l.tr_solve_lower_triangular(&fwd)
        .expect("factor has positive diagonal")
}
