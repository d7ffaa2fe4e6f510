use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{MrfError, Result};
use crate::forest::split::Splitter;
use crate::forest::{build_tree, Covariates, ForestConfig, SplitRule, Tree};
use crate::metric::{distance_matrix, MetricSpace, WeightVector};

/// Independent stream for tree `tree` of a forest seeded with `seed`.
pub(crate) fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

/// A fitted forest: its trees plus the training sample the leaves index.
#[derive(Debug)]
pub struct ForestModel<S: MetricSpace> {
    trees: Vec<Tree>,
    train_x: Covariates,
    responses: Arc<Vec<S::Point>>,
    space: Arc<S>,
    config: ForestConfig,
}

/// Fits `config.n_trees` trees, each on its own subsample drawn without
/// replacement.
///
/// The medoid rule computes the pairwise distance matrix of `y` once up
/// front and never calls the solver. Trees are grown in parallel, each from
/// a random stream fixed by `(config.seed, tree index)`, so the model does
/// not depend on the thread count.
pub fn fit<S: MetricSpace>(
    space: Arc<S>,
    x: Covariates,
    y: Vec<S::Point>,
    config: &ForestConfig,
) -> Result<ForestModel<S>> {
    let n = x.n();
    if y.len() != n {
        return Err(MrfError::LengthMismatch {
            expected: n,
            found: y.len(),
        });
    }
    config.validate(n, x.d())?;
    for (i, p) in y.iter().enumerate() {
        space.validate(p).map_err(|e| e.at_sample(i))?;
    }

    let dm = match config.split_rule {
        SplitRule::Medoid => Some(distance_matrix(&*space, &y)?),
        _ => None,
    };
    let splitter = match (config.split_rule, &dm) {
        (SplitRule::Medoid, Some(dm)) => Splitter::Medoid(dm),
        (SplitRule::ExactFrechet, _) => Splitter::Exact {
            space: &*space,
            responses: &y,
        },
        (SplitRule::TwoMeans, _) => Splitter::TwoMeans {
            space: &*space,
            responses: &y,
        },
        (SplitRule::Medoid, None) => unreachable!("distance matrix computed above"),
    };

    let s = config.subsample_size(n);
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|b| {
            let mut rng = tree_rng(config.seed, b);
            let sub = index::sample(&mut rng, n, s).into_vec();
            build_tree(&sub, &x, &splitter, config, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ForestModel {
        trees,
        train_x: x,
        responses: Arc::new(y),
        space,
        config: config.clone(),
    })
}

impl<S: MetricSpace> ForestModel<S> {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn train_x(&self) -> &Covariates {
        &self.train_x
    }

    pub fn responses(&self) -> &[S::Point] {
        &self.responses
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Averages per-tree leaf weights `1{i ∈ L(x)} / |L(x)|`. Trees whose
    /// leaf for `x` has no estimation points are left out of the average.
    pub fn forest_weights(&self, x: &[f64]) -> Result<WeightVector> {
        self.train_x.check_query(x)?;
        let mut raw = vec![0.0; self.train_x.n()];
        let mut contributing = 0usize;
        for tree in &self.trees {
            let leaf = tree.leaf_for(x);
            if leaf.estimate.is_empty() {
                continue;
            }
            contributing += 1;
            let share = 1.0 / leaf.estimate.len() as f64;
            for &i in &leaf.estimate {
                raw[i] += share;
            }
        }
        if contributing == 0 {
            return Err(MrfError::DegenerateWeights);
        }
        raw.iter_mut().for_each(|w| *w /= contributing as f64);
        WeightVector::normalized(raw)
    }

    /// Minimizer of the forest-weighted Fréchet functional at `x`; one
    /// solver call.
    pub fn predict(&self, x: &[f64]) -> Result<S::Point> {
        let w = self.forest_weights(x)?;
        self.space.weighted_frechet_mean(&self.responses, &w)
    }

    /// Predictions for each row of `x`, in order.
    pub fn predict_rows(&self, x: &Covariates) -> Result<Vec<S::Point>> {
        (0..x.n())
            .into_par_iter()
            .map(|i| self.predict(x.row(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::EuclideanSpace;

    fn line_data(n: usize) -> (Covariates, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 + 0.5) / n as f64]).collect();
        let y = rows.iter().map(|r| 2.0 * r[0]).collect();
        (Covariates::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn rejects_tiny_samples() {
        let (x, y) = line_data(9);
        let err = fit(Arc::new(EuclideanSpace::new()), x, y, &ForestConfig::default());
        assert!(matches!(err, Err(MrfError::Config(_))));
    }

    #[test]
    fn weights_from_single_tree() {
        let (x, y) = line_data(40);
        let config = ForestConfig {
            n_trees: 1,
            ..ForestConfig::default()
        };
        let model = fit(Arc::new(EuclideanSpace::new()), x, y, &config).unwrap();
        let q = [0.3];
        let leaf = model.trees()[0].leaf_for(&q).clone();
        match model.forest_weights(&q) {
            Ok(w) => {
                for (i, wi) in w.as_slice().iter().enumerate() {
                    let expected = if leaf.estimate.contains(&i) {
                        1.0 / leaf.estimate.len() as f64
                    } else {
                        0.0
                    };
                    assert!((*wi - expected).abs() <= 1e-15);
                }
            }
            Err(MrfError::DegenerateWeights) => assert!(leaf.estimate.is_empty()),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn medoid_fit_makes_no_solver_calls() {
        let (x, y) = line_data(60);
        let space = Arc::new(EuclideanSpace::new());
        let model = fit(space.clone(), x, y, &ForestConfig::default()).unwrap();
        assert_eq!(space.solver_calls(), 0);
        model.predict(&[0.5]).unwrap();
        assert_eq!(space.solver_calls(), 1);
    }
}
