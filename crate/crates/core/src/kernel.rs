//! Stationary covariance kernels over normalized inputs.
//!
//! All kernels have unit signal variance: `k(x, x) = 1` exactly. Inputs are
//! expected to be pre-normalized (the surrogate model normalizes design
//! points into the unit hypercube before evaluating kernels), so the default
//! length scale of 1.0 is meaningful across heterogeneous parameter units.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelFamily {
    SquaredExponential,
    Matern,
}

/// Kernel specification: family, length scale, and (for Matern) smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    length_scale: f64,
    nu: Option<f64>,
}

impl KernelSpec {
    pub fn squared_exponential(length_scale: f64) -> Result<KernelSpec> {
        check_length_scale(length_scale)?;
        Ok(KernelSpec {
            family: KernelFamily::SquaredExponential,
            length_scale,
            nu: None,
        })
    }

    /// Matern kernel with half-integer smoothness; only 3/2 and 5/2 are
    /// supported (their closed forms avoid Bessel-function evaluation).
    pub fn matern(nu: f64, length_scale: f64) -> Result<KernelSpec> {
        check_length_scale(length_scale)?;
        if nu != 1.5 && nu != 2.5 {
            return Err(Error::Config(format!(
                "unsupported Matern smoothness nu={nu}; supported values are 1.5 and 2.5"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::Matern,
            length_scale,
            nu: Some(nu),
        })
    }

    /// Parses the CLI spelling: `se`, `matern32`, or `matern52`, with the
    /// default unit length scale.
    pub fn parse_name(name: &str) -> Result<KernelSpec> {
        match name {
            "se" => KernelSpec::squared_exponential(1.0),
            "matern32" => KernelSpec::matern(1.5, 1.0),
            "matern52" => KernelSpec::matern(2.5, 1.0),
            other => Err(Error::Config(format!(
                "unknown kernel {other:?}; expected se, matern32, or matern52"
            ))),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    /// Kernel value from the squared Euclidean distance between two points.
    pub fn eval_sq_dist(&self, sq_dist: f64) -> f64 {
        let l = self.length_scale;
        match self.family {
            KernelFamily::SquaredExponential => (-sq_dist / (2.0 * l * l)).exp(),
            KernelFamily::Matern => {
                let r = sq_dist.sqrt() / l;
                match self.nu {
                    Some(nu) if nu == 1.5 => {
                        let t = 3.0f64.sqrt() * r;
                        (1.0 + t) * (-t).exp()
                    }
                    Some(nu) if nu == 2.5 => {
                        let t = 5.0f64.sqrt() * r;
                        (1.0 + t + t * t / 3.0) * (-t).exp()
                    }
                    _ => unreachable!("validated at construction"),
                }
            }
        }
    }
}

fn check_length_scale(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Config(format!(
            "length scale must be a positive finite number, got {l}"
        )));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Evaluates `k(a, b)`. Both points must share a dimension.
pub fn kernel_eval(kernel: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "kernel arguments have dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(kernel.eval_sq_dist(sq_dist(a, b)))
}

/// Builds the |A| x |B| covariance matrix with entries `k(A[i], B[j])`.
pub fn build_covariance(kernel: &KernelSpec, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let dim = a.first().or_else(|| b.first()).map_or(0, |v| v.len());
    for row in a.iter().chain(b.iter()) {
        if row.len() != dim {
            return Err(Error::Argument(format!(
                "covariance inputs mix dimensions {} and {}",
                dim,
                row.len()
            )));
        }
    }
    let mut m = DMatrix::zeros(a.len(), b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            m[(i, j)] = kernel.eval_sq_dist(sq_dist(x, y));
        }
    }
    Ok(m)
}

/// Symmetric covariance of a point set with itself, with an exact unit
/// diagonal.
pub fn build_covariance_symmetric(kernel: &KernelSpec, a: &[Vec<f64>]) -> DMatrix<f64> {
    let n = a.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0;
        for j in 0..i {
            let v = kernel.eval_sq_dist(sq_dist(&a[i], &a[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_is_exactly_one() {
        let x = vec![0.3, 0.7, 0.1];
        for k in [
            KernelSpec::squared_exponential(1.0).unwrap(),
            KernelSpec::matern(1.5, 1.0).unwrap(),
            KernelSpec::matern(2.5, 1.0).unwrap(),
        ] {
            assert_eq!(kernel_eval(&k, &x, &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn se_matches_direct_formula() {
        let k = KernelSpec::squared_exponential(1.0).unwrap();
        // squared distance 4 -> exp(-2)
        let v = kernel_eval(&k, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert!((v - 0.1353352832366127).abs() < 1e-15);
        // squared distance 2 -> exp(-1)
        let v = kernel_eval(&k, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn matern_closed_forms_match_high_precision_references() {
        // Reference values computed independently with 30-digit arithmetic
        // from (1+sqrt(3) r) exp(-sqrt(3) r) and
        // (1+sqrt(5) r + 5 r^2/3) exp(-sqrt(5) r), cross-checked against the
        // general Bessel-function form.
        let m32 = KernelSpec::matern(1.5, 1.0).unwrap();
        let m52 = KernelSpec::matern(2.5, 1.0).unwrap();
        let cases_32 = [
            (0.25, 0.929383617696480153),
            (0.5, 0.784887653957450654),
            (1.0, 0.483357724596507651),
            (2.0, 0.139731350192314671),
        ];
        for (r, expected) in cases_32 {
            let got = kernel_eval(&m32, &[0.0], &[r]).unwrap();
            assert!((got - expected).abs() < 1e-14, "m32 r={r}: {got}");
        }
        let cases_52 = [
            (0.25, 0.950959921678632923),
            (0.5, 0.828649142418125313),
            (1.0, 0.523994108831820311),
            (2.0, 0.138660219138504277),
        ];
        for (r, expected) in cases_52 {
            let got = kernel_eval(&m52, &[0.0], &[r]).unwrap();
            assert!((got - expected).abs() < 1e-14, "m52 r={r}: {got}");
        }
    }

    #[test]
    fn length_scale_rescales_distance() {
        let k1 = KernelSpec::squared_exponential(1.0).unwrap();
        let k2 = KernelSpec::squared_exponential(2.0).unwrap();
        let a = [0.0];
        let b = [1.0];
        let v1 = kernel_eval(&k1, &a, &[0.5]).unwrap();
        let v2 = kernel_eval(&k2, &a, &b).unwrap();
        assert!((v1 - v2).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_argument_error() {
        let k = KernelSpec::squared_exponential(1.0).unwrap();
        assert!(matches!(
            kernel_eval(&k, &[0.0], &[0.0, 1.0]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn invalid_nu_is_config_error() {
        assert!(matches!(KernelSpec::matern(2.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(KernelSpec::matern(1.5, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn covariance_of_identical_sets_is_symmetric_unit_diagonal() {
        let k = KernelSpec::squared_exponential(1.0).unwrap();
        let pts = vec![vec![0.1, 0.2], vec![0.9, 0.4], vec![0.5, 0.5]];
        let m = build_covariance_symmetric(&k, &pts);
        for i in 0..3 {
            assert_eq!(m[(i, i)], 1.0);
            for j in 0..3 {
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        // cross-check against the general builder
        let g = build_covariance(&k, &pts, &pts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[(i, j)] - g[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_points_at_squared_distance_two() {
        let k = KernelSpec::squared_exponential(1.0).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let m = build_covariance_symmetric(&k, &pts);
        assert!((m[(0, 1)] - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn matern52_approaches_se_at_zero_distance() {
        let se = KernelSpec::squared_exponential(1.0).unwrap();
        let m52 = KernelSpec::matern(2.5, 1.0).unwrap();
        // Exact agreement at zero distance; the gap shrinks as distance -> 0.
        assert_eq!(se.eval_sq_dist(0.0), m52.eval_sq_dist(0.0));
        let gap_near = (se.eval_sq_dist(0.01) - m52.eval_sq_dist(0.01)).abs();
        let gap_far = (se.eval_sq_dist(0.25) - m52.eval_sq_dist(0.25)).abs();
        assert!(gap_near < gap_far);
    }
}
