//! Random forests for Fréchet regression: responses in a metric space,
//! covariates in `[0, 1]^d`.
//!
//! Trees are grown with a choice of split rule. The medoid rule scores
//! splits from a precomputed distance matrix and never calls the space's
//! Fréchet mean solver while fitting; the exact and 2-means rules are the
//! solver-driven baselines. Predictions minimize the forest-weighted Fréchet
//! functional.

pub mod error;
pub mod forest;
pub mod metric;
pub mod simgen;
pub mod spaces;

pub use error::{MrfError, Result};
pub use forest::{fit, Covariates, ForestConfig, ForestModel, SplitRule, Tree};
pub use metric::{
    distance_matrix, frechet_functional, frechet_medoid, frechet_variance, DistanceMatrix,
    MetricSpace, SolverCounter, WeightVector,
};
