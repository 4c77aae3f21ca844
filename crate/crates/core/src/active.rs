//! Multi-model Bayesian active learning.
//!
//! One GP surrogate per objective; each iteration scores a random pool of
//! unvisited points under every model and queries the union of the
//! per-model top-k candidates. Candidate scores are posterior means
//! (sign-flipped for minimized objectives) with an optional
//! uncertainty bonus `beta * stddev`; `beta` defaults to zero, so the loop
//! is mean-greedy unless asked otherwise.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::gp::GpModel;
use crate::kernel::KernelSpec;
use crate::model_file::load_gp;
use crate::space::{
    sample_distinct_points, sample_unvisited_points, DesignSpace, Direction, ParameterVector,
    PointKey,
};
use crate::transfer::{lambda_schedule, TransferConfig};

/// One objective to model: a name matching an evaluator column, its
/// optimization direction, and the surrogate's kernel and noise.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    pub name: String,
    pub direction: Direction,
    pub kernel: KernelSpec,
    pub noise_variance: f64,
}

impl ObjectiveSpec {
    pub fn new(name: &str, direction: Direction) -> ObjectiveSpec {
        ObjectiveSpec {
            name: name.to_string(),
            direction,
            kernel: KernelSpec::squared_exponential(1.0).expect("unit length scale is valid"),
            noise_variance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub objectives: Vec<ObjectiveSpec>,
    /// Number of random points in the initial batch.
    pub n_init: usize,
    /// Candidates each model retains per iteration.
    pub candidates_per_model: usize,
    /// Random unvisited points scored per iteration.
    pub pool_size: usize,
    pub max_iterations: usize,
    /// Stop after this many consecutive iterations without improvement.
    pub patience: usize,
    /// Uncertainty bonus weight in the candidate score.
    pub exploration_beta: f64,
    pub seed: u64,
    pub transfer: Option<TransferConfig>,
    /// Hard cap on evaluator calls; proposal batches are trimmed to fit.
    pub max_queries: Option<usize>,
}

impl RunConfig {
    pub fn new(objectives: Vec<ObjectiveSpec>) -> RunConfig {
        RunConfig {
            objectives,
            n_init: 5,
            candidates_per_model: 5,
            pool_size: 1000,
            max_iterations: 50,
            patience: 10,
            exploration_beta: 0.0,
            seed: 0,
            transfer: None,
            max_queries: None,
        }
    }

    fn validate(&self, evaluator: &Evaluator) -> Result<Vec<usize>> {
        if self.objectives.is_empty() {
            return Err(Error::Config("run needs at least one objective".into()));
        }
        let mut seen = HashSet::new();
        for o in &self.objectives {
            if !seen.insert(o.name.clone()) {
                return Err(Error::Config(format!("duplicate objective name {:?}", o.name)));
            }
            if !(o.noise_variance.is_finite() && o.noise_variance >= 0.0) {
                return Err(Error::Config(format!(
                    "objective {:?} has invalid noise variance {}",
                    o.name, o.noise_variance
                )));
            }
        }
        if self.n_init == 0 {
            return Err(Error::Config("n_init must be at least 1".into()));
        }
        if self.candidates_per_model == 0 {
            return Err(Error::Config("candidates_per_model must be at least 1".into()));
        }
        if self.candidates_per_model * self.objectives.len() > self.pool_size {
            return Err(Error::Config(format!(
                "pool_size {} is smaller than candidates_per_model * objectives = {}",
                self.pool_size,
                self.candidates_per_model * self.objectives.len()
            )));
        }
        if self.max_iterations == 0 || self.patience == 0 {
            return Err(Error::Config(
                "max_iterations and patience must be at least 1".into(),
            ));
        }
        if !(self.exploration_beta.is_finite() && self.exploration_beta >= 0.0) {
            return Err(Error::Config(format!(
                "exploration beta must be nonnegative, got {}",
                self.exploration_beta
            )));
        }
        if let Some(t) = &self.transfer {
            t.validate()?;
        }
        // Map each objective onto its evaluator column.
        self.objectives
            .iter()
            .map(|o| {
                evaluator
                    .objective_names()
                    .iter()
                    .position(|n| *n == o.name)
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "objective {:?} is not provided by the evaluator (columns: {:?})",
                            o.name,
                            evaluator.objective_names()
                        ))
                    })
            })
            .collect()
    }
}

/// One batch of evaluator queries and the state of the incumbents after it.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// Successfully evaluated points with their full objective vectors.
    pub queried: Vec<(ParameterVector, Vec<f64>)>,
    /// Points the evaluator failed on; excluded from training, never retried.
    pub failed: Vec<ParameterVector>,
    /// Per-objective incumbent (point, value) after this batch.
    pub best_so_far: Vec<(ParameterVector, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct RunHistory {
    /// Record 0 is the random initialization batch; records 1.. are
    /// proposal iterations.
    pub iterations: Vec<IterationRecord>,
    /// Evaluator calls made (successful or failed).
    pub total_queries: usize,
    /// Set when the space ran out of unvisited points.
    pub space_exhausted: bool,
}

impl RunHistory {
    /// Proposal iterations completed (excludes the initialization batch).
    pub fn proposal_iterations(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    /// Final per-objective incumbents.
    pub fn final_best(&self) -> &[(ParameterVector, f64)] {
        &self.iterations.last().expect("history is never empty").best_so_far
    }

    /// Evaluator calls made up to the first batch whose incumbent for
    /// objective `m` reached `target` (under `direction`), or None.
    pub fn queries_until(&self, m: usize, target: f64, direction: Direction) -> Option<usize> {
        let mut queries = 0;
        for record in &self.iterations {
            queries += record.queried.len() + record.failed.len();
            let value = record.best_so_far[m].1;
            if value == target || direction.improves(value, target) {
                return Some(queries);
            }
        }
        None
    }
}

/// Serializable run summary, consumed by reporting tools.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub objectives: Vec<ObjectiveSummary>,
    pub total_queries: usize,
    pub iterations: usize,
    pub space_exhausted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectiveSummary {
    pub name: String,
    pub direction: String,
    pub best_value: f64,
    pub best_point: Vec<f64>,
}

impl RunHistory {
    pub fn summary(&self, objectives: &[ObjectiveSpec]) -> RunSummary {
        let best = self.final_best();
        RunSummary {
            objectives: objectives
                .iter()
                .zip(best)
                .map(|(spec, (point, value))| ObjectiveSummary {
                    name: spec.name.clone(),
                    direction: spec.direction.as_str().to_string(),
                    best_value: *value,
                    best_point: point.values().to_vec(),
                })
                .collect(),
            total_queries: self.total_queries,
            iterations: self.proposal_iterations(),
            space_exhausted: self.space_exhausted,
        }
    }

    /// Line-oriented best-so-far trace: iteration, objective, best value,
    /// best point (space-separated raw values).
    pub fn write_csv<W: std::io::Write>(
        &self,
        objectives: &[ObjectiveSpec],
        mut out: W,
    ) -> Result<()> {
        writeln!(out, "iteration,objective,best_value,best_point")?;
        for (i, record) in self.iterations.iter().enumerate() {
            for (spec, (point, value)) in objectives.iter().zip(&record.best_so_far) {
                writeln!(out, "{i},{},{value},{point}", spec.name)?;
            }
        }
        Ok(())
    }
}

/// Uniform random initialization: `n` distinct points, deterministic per
/// seed, clamped to the space size with a warning.
pub fn initialize(space: &DesignSpace, n: usize, seed: u64) -> Vec<ParameterVector> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    sample_distinct_points(space, n, &mut rng)
}

/// Scores a random pool of unvisited points under every model and returns
/// the union of the per-model top-k candidates. An empty result means the
/// space is exhausted.
pub fn propose_candidates(
    models: &[GpModel],
    space: &DesignSpace,
    k: usize,
    pool_size: usize,
    beta: f64,
    visited: &HashSet<PointKey>,
    seed: u64,
) -> Result<Vec<ParameterVector>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    propose_with_rng(models, space, k, pool_size, beta, visited, &mut rng, None)
}

/// Source-model blend applied while scoring candidates.
struct TransferContext<'a> {
    source: &'a GpModel,
    lambda1: f64,
    lambda2: f64,
}

#[allow(clippy::too_many_arguments)]
fn propose_with_rng<R: Rng>(
    models: &[GpModel],
    space: &DesignSpace,
    k: usize,
    pool_size: usize,
    beta: f64,
    visited: &HashSet<PointKey>,
    rng: &mut R,
    transfer: Option<&TransferContext<'_>>,
) -> Result<Vec<ParameterVector>> {
    let pool = sample_unvisited_points(space, pool_size, visited, rng);
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    // Normalized coordinates double as the deterministic tie-break key.
    let pool_norm: Vec<Vec<f64>> = pool
        .iter()
        .map(|p| space.normalize(p))
        .collect::<Result<_>>()?;

    let mut batch: Vec<ParameterVector> = Vec::with_capacity(k * models.len());
    let mut chosen: HashSet<PointKey> = HashSet::new();
    for model in models {
        let (means, vars) = match transfer {
            Some(ctx) => crate::transfer::combine_posterior(
                model,
                ctx.source,
                ctx.lambda1,
                ctx.lambda2,
                &pool,
            )?,
            None => model.posterior(&pool)?,
        };
        let sign = match model.direction() {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        };
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&a, &b| {
            let score_a = sign * means[a] + beta * vars[a].sqrt();
            let score_b = sign * means[b] + beta * vars[b].sqrt();
            score_b
                .partial_cmp(&score_a)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| {
                    pool_norm[a]
                        .iter()
                        .zip(&pool_norm[b])
                        .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        for &i in order.iter().take(k) {
            if chosen.insert(pool[i].key()) {
                batch.push(pool[i].clone());
            }
        }
    }
    Ok(batch)
}

/// True when the run should stop: the proposal-iteration budget is spent,
/// no objective has improved for `patience` consecutive iterations, or the
/// space is exhausted.
pub fn stopping_check(history: &RunHistory, config: &RunConfig) -> bool {
    if history.space_exhausted {
        return true;
    }
    if history.proposal_iterations() >= config.max_iterations {
        return true;
    }
    let mut flat = 0;
    for pair in history.iterations.windows(2).rev() {
        let improved = config.objectives.iter().enumerate().any(|(m, spec)| {
            spec.direction
                .improves(pair[1].best_so_far[m].1, pair[0].best_so_far[m].1)
        });
        if improved {
            break;
        }
        flat += 1;
    }
    flat >= config.patience
}

/// Runs the full active-learning loop against an evaluator and returns the
/// final surrogate ensemble plus the complete run history.
pub fn run_active_learning(
    config: &RunConfig,
    evaluator: &Evaluator,
) -> Result<(Vec<GpModel>, RunHistory)> {
    let columns = config.validate(evaluator)?;
    let space = evaluator.space();

    let source_model = match &config.transfer {
        Some(t) => {
            let model = load_gp(&t.source_model_path)?;
            if model.dimension() != space.dimension() {
                return Err(Error::Config(format!(
                    "transfer source model has dimension {}, design space has {}",
                    model.dimension(),
                    space.dimension()
                )));
            }
            Some(model)
        }
        None => None,
    };

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut visited: HashSet<PointKey> = HashSet::new();
    let mut obs_x: Vec<ParameterVector> = Vec::new();
    let mut obs_y: Vec<Vec<f64>> = vec![Vec::new(); config.objectives.len()];
    let mut best: Vec<Option<(ParameterVector, f64)>> = vec![None; config.objectives.len()];
    let mut history = RunHistory::default();

    let run_batch = |points: &[ParameterVector],
                         visited: &mut HashSet<PointKey>,
                         obs_x: &mut Vec<ParameterVector>,
                         obs_y: &mut Vec<Vec<f64>>,
                         best: &mut Vec<Option<(ParameterVector, f64)>>,
                         history: &mut RunHistory|
     -> Result<()> {
        let mut queried = Vec::new();
        let mut failed = Vec::new();
        for point in points {
            visited.insert(point.key());
            history.total_queries += 1;
            match evaluator.query(point) {
                Ok(values) => {
                    obs_x.push(point.clone());
                    for ((m, &col), spec) in columns.iter().enumerate().zip(&config.objectives) {
                        let v = values[col];
                        obs_y[m].push(v);
                        let better = match &best[m] {
                            None => true,
                            Some((_, incumbent)) => spec.direction.improves(v, *incumbent),
                        };
                        if better {
                            best[m] = Some((point.clone(), v));
                        }
                    }
                    queried.push((point.clone(), values));
                }
                Err(err) => {
                    log::warn!("evaluator failed on {point}: {err}");
                    failed.push(point.clone());
                }
            }
        }
        if queried.is_empty() {
            return Err(Error::Data(format!(
                "evaluator failed on all {} points of the batch; aborting run",
                points.len()
            )));
        }
        history.iterations.push(IterationRecord {
            queried,
            failed,
            best_so_far: best
                .iter()
                .map(|b| b.clone().expect("batch had at least one success"))
                .collect(),
        });
        Ok(())
    };

    let init_points = sample_distinct_points(space, config.n_init, &mut rng);
    run_batch(
        &init_points,
        &mut visited,
        &mut obs_x,
        &mut obs_y,
        &mut best,
        &mut history,
    )?;

    let fit_all = |obs_x: &[ParameterVector], obs_y: &[Vec<f64>]| -> Result<Vec<GpModel>> {
        config
            .objectives
            .iter()
            .enumerate()
            .map(|(m, spec)| {
                Ok(GpModel::fit(
                    space,
                    obs_x,
                    &obs_y[m],
                    spec.kernel,
                    spec.noise_variance,
                    spec.direction,
                )?
                .with_name(&spec.name))
            })
            .collect()
    };

    let mut models = fit_all(&obs_x, &obs_y)?;

    loop {
        if stopping_check(&history, config) {
            break;
        }
        let iteration = history.proposal_iterations();
        let transfer_ctx = match (&config.transfer, &source_model) {
            (Some(t), Some(source)) => Some(TransferContext {
                source,
                lambda1: lambda_schedule(iteration, config.max_iterations, t.lambda1_initial),
                lambda2: lambda_schedule(iteration, config.max_iterations, t.lambda2_initial),
            }),
            _ => None,
        };
        let batch = propose_with_rng(
            &models,
            space,
            config.candidates_per_model,
            config.pool_size,
            config.exploration_beta,
            &visited,
            &mut rng,
            transfer_ctx.as_ref(),
        )?;
        if batch.is_empty() {
            history.space_exhausted = true;
            break;
        }
        run_batch(
            &batch,
            &mut visited,
            &mut obs_x,
            &mut obs_y,
            &mut best,
            &mut history,
        )?;
        models = fit_all(&obs_x, &obs_y)?;
    }

    Ok((models, history))
}
