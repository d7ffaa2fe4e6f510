//! Synthetic regression data from a single-index model.
//!
//! Each dataset draws `α ~ N(0, 1)` and `β ~ N(0, I_d)`, samples covariates
//! uniformly on `[0, 1]^d`, maps `η = α + (x - 0.5)ᵀβ / √d` to a mean
//! response `m(x) = g(η)` and perturbs it with a space-specific noise map.
//! Train and test sets of one replicate share `(α, β)`; the noiseless means
//! are kept alongside the responses for error measurement.

mod dump;
mod scenarios;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{MrfError, Result};
use crate::forest::Covariates;
use crate::metric::MetricSpace;

pub use dump::{read_replicate, write_replicate, DumpHeader};
pub use scenarios::{
    sphere_mean, warping_mean, EuclideanScenario, SphereScenario, WarpingScenario,
    WassersteinScenario, SPHERE_NOISE_VARIANCE, WASSERSTEIN_GAMMA, WASSERSTEIN_SIGMA0,
};

/// Test-set size used throughout the experiments.
pub const DEFAULT_TEST_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpaceKind {
    Euclidean,
    Wasserstein,
    Sphere,
    Warping,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 4] = [
        SpaceKind::Euclidean,
        SpaceKind::Wasserstein,
        SpaceKind::Sphere,
        SpaceKind::Warping,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::Wasserstein => "wasserstein",
            SpaceKind::Sphere => "sphere",
            SpaceKind::Warping => "warping",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceKind {
    type Err = MrfError;

    fn from_str(s: &str) -> Result<Self> {
        SpaceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| MrfError::Config(format!("unknown space `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub space: SpaceKind,
    pub n_train: usize,
    pub d: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(space: SpaceKind, n_train: usize, d: usize, seed: u64) -> Self {
        Self {
            space,
            n_train,
            d,
            n_test: DEFAULT_TEST_SIZE,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleIndexParams {
    pub alpha: f64,
    pub beta: Vec<f64>,
}

impl SingleIndexParams {
    pub fn draw<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let alpha = rng.sample(StandardNormal);
        let beta = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        Self { alpha, beta }
    }

    pub fn d(&self) -> usize {
        self.beta.len()
    }
}

/// `η = α + (x - 0.5)ᵀ β / √d`.
pub fn eta(x: &[f64], params: &SingleIndexParams) -> Result<f64> {
    if x.len() != params.d() {
        return Err(MrfError::LengthMismatch {
            expected: params.d(),
            found: x.len(),
        });
    }
    let dot: f64 = x.iter().zip(&params.beta).map(|(xi, b)| (xi - 0.5) * b).sum();
    Ok(params.alpha + dot / (params.d() as f64).sqrt())
}

/// Logistic function `1 / (1 + e^{-t})`.
pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Covariates, noisy responses and the noiseless means behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<P> {
    pub x: Covariates,
    pub y: Vec<P>,
    pub truth: Vec<P>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replicate<P> {
    pub config: ScenarioConfig,
    pub params: SingleIndexParams,
    pub train: Sample<P>,
    pub test: Sample<P>,
}

/// A data-generating process for one response space.
pub trait Scenario: Send + Sync {
    type Space: MetricSpace;

    fn kind(&self) -> SpaceKind;

    /// A fresh space handle (with its own solver counter).
    fn space(&self) -> Self::Space;

    /// The mean response `g(η)`.
    fn mean(&self, eta: f64) -> Result<<Self::Space as MetricSpace>::Point>;

    /// One draw of the noise map applied to `mean`.
    fn perturb<R: Rng + ?Sized>(
        &self,
        mean: &<Self::Space as MetricSpace>::Point,
        rng: &mut R,
    ) -> Result<<Self::Space as MetricSpace>::Point>;

    /// `n` observations with covariates uniform on `[0, 1]^d`.
    fn generate<R: Rng + ?Sized>(
        &self,
        params: &SingleIndexParams,
        n: usize,
        rng: &mut R,
    ) -> Result<Sample<<Self::Space as MetricSpace>::Point>> {
        let d = params.d();
        let mut flat = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        let mut truth = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let m = self.mean(eta(&row, params)?)?;
            y.push(self.perturb(&m, rng)?);
            truth.push(m);
            flat.extend(row);
        }
        Ok(Sample {
            x: Covariates::from_flat(n, d, flat)?,
            y,
            truth,
        })
    }
}

/// Draws parameters, then the training set, then the test set, all from
/// one stream seeded by `config.seed`.
pub fn generate_replicate<Sc: Scenario>(
    scenario: &Sc,
    config: &ScenarioConfig,
) -> Result<Replicate<<Sc::Space as MetricSpace>::Point>> {
    if config.d == 0 {
        return Err(MrfError::Config("d must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = SingleIndexParams::draw(config.d, &mut rng);
    let train = scenario.generate(&params, config.n_train, &mut rng)?;
    let test = scenario.generate(&params, config.n_test, &mut rng)?;
    Ok(Replicate {
        config: config.clone(),
        params,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_examples() {
        let zero = SingleIndexParams {
            alpha: 0.7,
            beta: vec![0.0; 3],
        };
        assert_eq!(eta(&[0.1, 0.9, 0.3], &zero).unwrap(), 0.7);
        let p = SingleIndexParams {
            alpha: -1.2,
            beta: vec![1.0, -2.0],
        };
        assert_eq!(eta(&[0.5, 0.5], &p).unwrap(), -1.2);
        let p = SingleIndexParams {
            alpha: 0.0,
            beta: vec![2.0, 0.0, 0.0, 0.0],
        };
        assert_eq!(eta(&[1.0, 0.5, 0.5, 0.5], &p).unwrap(), 0.5);
        assert!(eta(&[0.5], &p).is_err());
    }

    #[test]
    fn space_kind_parsing() {
        for k in SpaceKind::ALL {
            assert_eq!(k.to_string().parse::<SpaceKind>().unwrap(), k);
        }
        assert!("hyperbolic".parse::<SpaceKind>().is_err());
    }
}
