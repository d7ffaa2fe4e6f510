//! One-dimensional 2-Wasserstein space, with distributions stored as
//! quantile functions sampled on a fixed interior grid.

use crate::error::{MrfError, Result};
use crate::metric::{MetricSpace, SolverCounter, WeightVector};
use crate::spaces::{pava_isotonic, trapezoid_weights};

pub const DEFAULT_QUANTILE_GRID: usize = 100;

/// Equispaced interior grid `u_m = m / (M + 1)`, `m = 1..=M`.
pub fn quantile_grid(size: usize) -> Vec<f64> {
    (1..=size).map(|m| m as f64 / (size + 1) as f64).collect()
}

/// Quantile function `F⁻¹` evaluated on the quantile grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction(Vec<f64>);

impl QuantileFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MrfError::invalid("wasserstein", "non-finite quantile"));
        }
        if let Some(m) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(MrfError::invalid(
                "wasserstein",
                format!("quantiles decrease at grid index {m}"),
            ));
        }
        Ok(Self(values))
    }

    /// Quantiles of `N(mean, sd²)` on `grid`.
    pub fn normal(mean: f64, sd: f64, grid: &[f64]) -> Result<Self> {
        use statrs::distribution::{ContinuousCDF, Normal};
        let standard = Normal::standard();
        Self::new(
            grid.iter()
                .map(|&u| mean + sd * standard.inverse_cdf(u))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Trapezoid-rule `L₂[0,1]` distance between two quantile vectors.
pub fn wasserstein_distance(p: &QuantileFunction, q: &QuantileFunction) -> Result<f64> {
    if p.len() != q.len() {
        return Err(MrfError::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(weighted_l2(&trapezoid_weights(p.len()), &p.0, &q.0))
}

fn weighted_l2(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn barycenter(support: &[&QuantileFunction], weights: &[f64]) -> Result<QuantileFunction> {
    let len = support[0].len();
    let mut avg = vec![0.0; len];
    for (q, w) in support.iter().zip(weights) {
        if q.len() != len {
            return Err(MrfError::LengthMismatch {
                expected: len,
                found: q.len(),
            });
        }
        avg.iter_mut().zip(&q.0).for_each(|(a, v)| *a += w * v);
    }
    QuantileFunction::new(pava_isotonic(&avg, &vec![1.0; len])?)
}

/// Pointwise weighted average of quantile vectors, projected back onto
/// nondecreasing vectors. Uncounted; [`WassersteinSpace`] counts.
pub fn wasserstein_mean(samples: &[QuantileFunction], weights: &WeightVector) -> Result<QuantileFunction> {
    if samples.len() != weights.len() {
        return Err(MrfError::LengthMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    let (support, w): (Vec<&QuantileFunction>, Vec<f64>) =
        weights.support().map(|(i, w)| (&samples[i], w)).unzip();
    if support.is_empty() {
        return Err(MrfError::DegenerateWeights);
    }
    barycenter(&support, &w)
}

#[derive(Debug)]
pub struct WassersteinSpace {
    grid_size: usize,
    weights: Vec<f64>,
    counter: SolverCounter,
}

impl Default for WassersteinSpace {
    fn default() -> Self {
        Self::new(DEFAULT_QUANTILE_GRID)
    }
}

impl WassersteinSpace {
    pub fn new(grid_size: usize) -> Self {
        Self {
            grid_size,
            weights: trapezoid_weights(grid_size),
            counter: SolverCounter::new(),
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn grid(&self) -> Vec<f64> {
        quantile_grid(self.grid_size)
    }

    fn check_len(&self, q: &QuantileFunction) -> Result<()> {
        if q.len() != self.grid_size {
            return Err(MrfError::LengthMismatch {
                expected: self.grid_size,
                found: q.len(),
            });
        }
        Ok(())
    }
}

impl MetricSpace for WassersteinSpace {
    type Point = QuantileFunction;

    fn name(&self) -> &'static str {
        "wasserstein"
    }

    fn validate(&self, point: &QuantileFunction) -> Result<()> {
        self.check_len(point)?;
        QuantileFunction::new(point.0.clone()).map(|_| ())
    }

    fn distance(&self, a: &QuantileFunction, b: &QuantileFunction) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(weighted_l2(&self.weights, &a.0, &b.0))
    }

    fn solve_frechet_mean(&self, support: &[&QuantileFunction], weights: &[f64]) -> Result<QuantileFunction> {
        barycenter(support, weights)
    }

    fn solver_counter(&self) -> &SolverCounter {
        &self.counter
    }

    fn payload_width(&self) -> usize {
        self.grid_size
    }

    fn encode(&self, point: &QuantileFunction) -> Vec<f64> {
        point.0.clone()
    }

    fn decode(&self, payload: &[f64]) -> Result<QuantileFunction> {
        let q = QuantileFunction::new(payload.to_vec())?;
        self.check_len(&q)?;
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[f64]) -> QuantileFunction {
        QuantileFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let grid = quantile_grid(100);
        let p = QuantileFunction::normal(0.0, 1.0, &grid).unwrap();
        assert_eq!(wasserstein_distance(&p, &p).unwrap(), 0.0);
        let shifted = QuantileFunction::normal(1.0, 1.0, &grid).unwrap();
        assert!((wasserstein_distance(&p, &shifted).unwrap() - 1.0).abs() < 1e-12);
        let c = -2.5;
        let moved = q(&p.values().iter().map(|v| v + c).collect::<Vec<_>>());
        assert!((wasserstein_distance(&p, &moved).unwrap() - c.abs()).abs() < 1e-12);
    }

    #[test]
    fn four_point_grid_against_quadrature() {
        // Squared differences (1, 0, 4, 9) on nodes spaced 1/3 apart over the
        // averaged interval: (1/2·1 + 0 + 4 + 1/2·9) / 3 = 3.
        let a = q(&[0.0, 1.0, 2.0, 3.0]);
        let b = q(&[1.0, 1.0, 4.0, 6.0]);
        let d = wasserstein_distance(&a, &b).unwrap();
        assert!((d - 3.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch() {
        assert!(wasserstein_distance(&q(&[0.0, 1.0]), &q(&[0.0])).is_err());
        let space = WassersteinSpace::new(3);
        assert!(space.distance(&q(&[0.0, 1.0]), &q(&[0.0, 1.0])).is_err());
        assert!(space.decode(&[1.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn mean_examples() {
        let a = q(&[0.0, 1.0, 2.0]);
        let b = q(&[2.0, 2.0, 5.0]);
        let m = wasserstein_mean(&[a.clone(), b.clone()], &WeightVector::uniform(2)).unwrap();
        assert_eq!(m.values(), &[1.0, 1.5, 3.5]);
        let only = wasserstein_mean(&[a.clone(), b], &WeightVector::point_mass(2, 0)).unwrap();
        assert_eq!(only, a);
    }

    #[test]
    fn normal_barycenter() {
        let grid = quantile_grid(100);
        let n0 = QuantileFunction::normal(0.0, 1.0, &grid).unwrap();
        let n2 = QuantileFunction::normal(2.0, 1.0, &grid).unwrap();
        let n1 = QuantileFunction::normal(1.0, 1.0, &grid).unwrap();
        let space = WassersteinSpace::default();
        let m = space
            .weighted_frechet_mean(&[n0, n2], &WeightVector::uniform(2))
            .unwrap();
        for (x, y) in m.values().iter().zip(n1.values()) {
            assert!((x - y).abs() < 1e-9);
        }
        assert_eq!(space.solver_calls(), 1);
    }

    #[test]
    fn rejects_decreasing() {
        assert!(QuantileFunction::new(vec![0.0, 2.0, 1.0]).is_err());
    }
}
