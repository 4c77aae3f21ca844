//! Gaussian regression bootstrapping: resamples a fitted surrogate to mint
//! simulated datasets. A simulated observation is the posterior mean plus,
//! optionally, one joint draw from the posterior covariance — the error term
//! is sampled jointly across the whole query set so spatial correlation is
//! preserved.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::space::{sample_distinct_points, DesignSpace, ParameterVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Simulated value is the posterior mean; deterministic given the
    /// query list.
    MeanOnly,
    /// Posterior mean plus one joint Gaussian draw from the posterior
    /// covariance.
    JointPosterior,
}

#[derive(Debug, Clone)]
pub enum QuerySource {
    /// Distinct points drawn uniformly from the design space.
    UniformFromSpace,
    /// Caller-provided query locations, used verbatim.
    ProvidedList(Vec<ParameterVector>),
}

#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    pub n_points: usize,
    pub noise_mode: NoiseMode,
    pub seed: u64,
    pub query_source: QuerySource,
}

impl BootstrapConfig {
    pub fn new(n_points: usize, noise_mode: NoiseMode, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            n_points,
            noise_mode,
            seed,
            query_source: QuerySource::UniformFromSpace,
        }
    }
}

/// Simulated observations minted from a fitted surrogate.
pub type SimulatedDataset = Vec<(ParameterVector, f64)>;

/// Draws a simulated dataset from the surrogate. Deterministic per seed.
pub fn bootstrap_sample(
    gp: &GpModel,
    space: &DesignSpace,
    cfg: &BootstrapConfig,
) -> Result<SimulatedDataset> {
    if gp.dimension() != space.dimension() {
        return Err(Error::Argument(format!(
            "model dimension {} does not match space dimension {}",
            gp.dimension(),
            space.dimension()
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let points = match &cfg.query_source {
        QuerySource::ProvidedList(list) => {
            if list.is_empty() {
                return Err(Error::Argument("provided query list is empty".into()));
            }
            list.clone()
        }
        QuerySource::UniformFromSpace => {
            if cfg.n_points == 0 {
                return Err(Error::Argument("n_points must be at least 1".into()));
            }
            sample_distinct_points(space, cfg.n_points, &mut rng)
        }
    };

    let values = match cfg.noise_mode {
        NoiseMode::MeanOnly => gp.posterior(&points)?.0,
        NoiseMode::JointPosterior => {
            let (means, cov) = gp.posterior_joint(&points)?;
            let m = points.len();
            // Factor the posterior covariance with its own jitter ladder;
            // at training points the covariance is numerically zero and
            // needs the absolute floor.
            let base = (cov.trace() / m as f64).max(1e-14);
            let mut jitter = 1e-8 * base;
            let chol = loop {
                let mut shifted = cov.clone();
                for i in 0..m {
                    shifted[(i, i)] += jitter;
                }
                match nalgebra::Cholesky::new(shifted) {
                    Some(c) => break c.unpack(),
                    None => {
                        jitter *= 10.0;
                        if jitter > 1e-2 * base.max(1.0) {
                            return Err(Error::Numerical(
                                "posterior covariance factorization failed after jitter escalation"
                                    .into(),
                            ));
                        }
                    }
                }
            };
            let z = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let noise = chol * z;
            means.iter().zip(noise.iter()).map(|(mu, e)| mu + e).collect()
        }
    };

    Ok(points.into_iter().zip(values).collect())
}
