//! Statistical performance modeling over discrete design spaces.
//!
//! The toolkit fits Gaussian-process surrogates to expensive objective
//! evaluations (replayed result tables or synthetic stand-ins), drives a
//! multi-model active-learning loop over them, transfers knowledge between
//! correlated tasks, resamples fitted surrogates into simulated datasets,
//! and fits downstream regression models (linear, LASSO, random forest)
//! scored by normalized RMSE. Multi-objective runs expose exact
//! Pareto-frontier extraction.
//!
//! Everything is deterministic given a seed: reruns reproduce query
//! sequences, simulated datasets, and fitted models bit-exactly.

pub mod active;
pub mod bootstrap;
pub mod error;
pub mod evaluator;
pub mod gp;
pub mod kernel;
pub mod model_file;
pub mod pareto;
pub mod regression;
pub mod space;
pub mod transfer;

pub use active::{
    initialize, propose_candidates, run_active_learning, stopping_check, IterationRecord,
    ObjectiveSpec, RunConfig, RunHistory, RunSummary,
};
pub use bootstrap::{bootstrap_sample, BootstrapConfig, NoiseMode, QuerySource, SimulatedDataset};
pub use error::{Error, ErrorCategory, Result};
pub use evaluator::{
    load_table_evaluator, make_synthetic_evaluator, Evaluator, EvaluatorKind, SyntheticKind,
    TableData,
};
pub use gp::GpModel;
pub use kernel::{build_covariance, kernel_eval, KernelFamily, KernelSpec};
pub use model_file::{load_gp, save_gp};
pub use pareto::{dominates, pareto_frontier, ObjectivePoint, Provenance};
pub use regression::{
    fit_lasso_path, fit_linear, fit_random_forest, normalized_rmse, ForestConfig, ForestModel,
    LassoPath, LinearModel, RegressionDataset,
};
pub use space::{
    load_design_space, DesignSpace, Direction, Manifest, ObjectiveDecl, Parameter,
    ParameterVector, PointKey,
};
pub use transfer::{combine_posterior, lambda_schedule, task_correlation, TransferConfig};
