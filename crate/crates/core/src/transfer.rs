//! Inductive GP transfer learning: blends a persisted source surrogate into
//! the target's posterior during candidate scoring.
//!
//! The blend operates on the de-standardized (original) observation scale:
//! source and target objectives measure the same metric on different tasks,
//! so their units coincide. The source weight decays linearly to zero over
//! the course of a run.

use std::path::PathBuf;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::space::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecaySchedule {
    /// `lambda(i) = lambda_initial * (1 - i / total)`.
    LinearToZero,
}

/// Configuration for blending a saved source model into a run.
#[derive(Debug, Clone)]
pub struct TransferConfig {
    pub source_model_path: PathBuf,
    pub lambda1_initial: f64,
    pub lambda2_initial: f64,
    pub decay: DecaySchedule,
}

impl TransferConfig {
    pub fn new(source_model_path: impl Into<PathBuf>) -> TransferConfig {
        TransferConfig {
            source_model_path: source_model_path.into(),
            lambda1_initial: 0.5,
            lambda2_initial: 0.0,
            decay: DecaySchedule::LinearToZero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1_initial", self.lambda1_initial),
            ("lambda2_initial", self.lambda2_initial),
        ] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::Config(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Linear decay of a transfer weight over the run: full weight at iteration
/// 0, zero at `total_iterations`.
pub fn lambda_schedule(iteration: usize, total_iterations: usize, lambda_initial: f64) -> f64 {
    debug_assert!(total_iterations >= 1);
    debug_assert!(iteration <= total_iterations);
    let total = total_iterations.max(1) as f64;
    let frac = (iteration as f64 / total).min(1.0);
    lambda_initial * (1.0 - frac)
}

/// Blended posterior: mean `mu_target + l1 * mu_source` and variance
/// `var_target + l2 * var_source`, both on the target's original scale.
pub fn combine_posterior(
    target: &GpModel,
    source: &GpModel,
    lambda1: f64,
    lambda2: f64,
    queries: &[ParameterVector],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if target.dimension() != source.dimension() {
        return Err(Error::Config(format!(
            "source model dimension {} does not match target dimension {}",
            source.dimension(),
            target.dimension()
        )));
    }
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) {
        return Err(Error::Config(format!(
            "transfer weights must be nonnegative, got lambda1={lambda1} lambda2={lambda2}"
        )));
    }
    let (mut means, mut vars) = target.posterior(queries)?;
    let (src_means, src_vars) = source.posterior(queries)?;
    for i in 0..means.len() {
        means[i] += lambda1 * src_means[i];
        vars[i] += lambda2 * src_vars[i];
    }
    Ok((means, vars))
}

/// Pearson correlation between two observation series, with a two-sided
/// p-value from the exact t statistic `rho * sqrt((n-2) / (1-rho^2))`
/// against Student-t with n-2 degrees of freedom.
pub fn task_correlation(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 3 {
        return Err(Error::Argument(format!(
            "correlation needs at least 3 observations, got {n}"
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in correlation input".into()));
    }
    let nf = n as f64;
    let mean_a = a.iter().sum::<f64>() / nf;
    let mean_b = b.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Data(
            "correlation is undefined: a series has zero variance".into(),
        ));
    }
    let rho = (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0);

    let dof = (n - 2) as f64;
    let pvalue = if 1.0 - rho * rho <= f64::EPSILON {
        0.0
    } else {
        let t = rho * (dof / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof)
            .map_err(|e| Error::Numerical(format!("t distribution: {e}")))?;
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok((rho, pvalue))
}
