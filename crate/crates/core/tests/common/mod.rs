//! Independent numerical oracles for integration tests.
//!
//! Everything here is written from the mathematical definitions with plain
//! loops — no shared code with the library's linear-algebra path — so a
//! match between the two is meaningful.

#![allow(dead_code)]

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col] != 0.0, "singular system in oracle");
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Kernel formulas written straight from their closed forms.
pub fn oracle_kernel(family: &str, length_scale: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let r = d2.sqrt() / length_scale;
    match family {
        "se" => (-d2 / (2.0 * length_scale * length_scale)).exp(),
        "matern32" => {
            let t = 3.0_f64.sqrt() * r;
            (1.0 + t) * (-t).exp()
        }
        "matern52" => {
            let t = 5.0_f64.sqrt() * r;
            (1.0 + t + t * t / 3.0) * (-t).exp()
        }
        other => panic!("unknown kernel family {other}"),
    }
}

/// Full GP posterior computed from first principles: standardize, build the
/// shifted covariance, dense-solve, and evaluate the textbook mean and
/// variance formulas. Mirrors the model's documented conventions
/// (min-max input normalization, z-score standardization, jitter on the
/// factorized diagonal with the matching variance correction).
pub struct OraclePosterior {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_posterior(
    family: &str,
    length_scale: f64,
    bounds: &[(f64, f64)],
    x_train_raw: &[Vec<f64>],
    y_train_raw: &[f64],
    noise_variance: f64,
    jitter: f64,
    queries_raw: &[Vec<f64>],
) -> OraclePosterior {
    let normalize = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(bounds)
            .map(|(&v, &(lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    };
    let xs: Vec<Vec<f64>> = x_train_raw.iter().map(|x| normalize(x)).collect();
    let qs: Vec<Vec<f64>> = queries_raw.iter().map(|x| normalize(x)).collect();

    let n = xs.len();
    let y_mean = y_train_raw.iter().sum::<f64>() / n as f64;
    let var = y_train_raw.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n as f64;
    let mut y_std = var.sqrt();
    if y_std <= 1e-12 * y_mean.abs().max(1.0) {
        y_std = 1.0;
    }
    let y: Vec<f64> = y_train_raw.iter().map(|v| (v - y_mean) / y_std).collect();

    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            k[i][j] = oracle_kernel(family, length_scale, &xs[i], &xs[j]);
            if i == j {
                k[i][j] += noise_variance + jitter;
            }
        }
    }
    let alpha = solve_dense(&k, &y);

    let mut means = Vec::with_capacity(qs.len());
    let mut variances = Vec::with_capacity(qs.len());
    for q in &qs {
        let kstar: Vec<f64> = xs
            .iter()
            .map(|x| oracle_kernel(family, length_scale, x, q))
            .collect();
        let mean_std: f64 = kstar.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        means.push(y_mean + y_std * mean_std);
        let sol = solve_dense(&k, &kstar);
        let explained: f64 = kstar.iter().zip(&sol).map(|(a, b)| a * b).sum();
        variances.push((1.0 - explained - jitter).max(0.0) * y_std * y_std);
    }
    OraclePosterior { means, variances }
}

/// Ordinary least squares through the normal equations, solved densely.
/// Returns (intercept, coefficients).
pub fn oracle_ols(features: &[Vec<f64>], targets: &[f64]) -> (f64, Vec<f64>) {
    let p = features[0].len();
    // Augment with the intercept column.
    let mut xtx = vec![vec![0.0; p + 1]; p + 1];
    let mut xty = vec![0.0; p + 1];
    for (row, &y) in features.iter().zip(targets) {
        let mut aug = vec![1.0];
        aug.extend_from_slice(row);
        for i in 0..=p {
            xty[i] += aug[i] * y;
            for j in 0..=p {
                xtx[i][j] += aug[i] * aug[j];
            }
        }
    }
    let beta = solve_dense(&xtx, &xty);
    (beta[0], beta[1..].to_vec())
}

/// Pearson correlation straight from the definition.
pub fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}
