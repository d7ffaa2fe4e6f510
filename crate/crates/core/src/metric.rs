//! The metric-space contract and the Fréchet functionals that only need a
//! distance matrix.
//!
//! A [`MetricSpace`] owns the geometry: validity of points, the distance and
//! a weighted Fréchet mean solver. Every call into the solver goes through
//! [`MetricSpace::frechet_mean_of`], which bumps the space's
//! [`SolverCounter`]; distances are never counted.

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{MrfError, Result};

/// Tolerance on the total mass of a non-degenerate [`WeightVector`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Atomic count of weighted Fréchet mean solves.
#[derive(Debug, Default)]
pub struct SolverCounter(AtomicU64);

impl SolverCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

/// Non-negative weights over a sample, either summing to one or all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(MrfError::InvalidWeights(format!(
                "weight {bad} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total != 0.0 && (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(MrfError::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    /// Rescales raw non-negative masses to sum to one. All-zero input stays
    /// all-zero.
    pub fn normalized(mut raw: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.iter_mut().for_each(|w| *w /= total);
        }
        Self::new(raw)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// All mass on sample `index`.
    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.0.iter().all(|w| *w == 0.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, w)| *w > 0.0)
    }
}

/// A metric space `(Ω, d)` with a weighted Fréchet mean solver.
pub trait MetricSpace: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync;

    fn name(&self) -> &'static str;

    /// Checks the space's validity predicate for `point`.
    fn validate(&self, point: &Self::Point) -> Result<()>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// Minimizes `Σ wᵢ d(ω, pᵢ)²` over the space. `weights` are positive
    /// and sum to one; callers go through [`Self::frechet_mean_of`].
    fn solve_frechet_mean(&self, support: &[&Self::Point], weights: &[f64])
        -> Result<Self::Point>;

    fn solver_counter(&self) -> &SolverCounter;

    /// Number of reals in the flat payload written by [`Self::encode`].
    fn payload_width(&self) -> usize;

    fn encode(&self, point: &Self::Point) -> Vec<f64>;

    fn decode(&self, payload: &[f64]) -> Result<Self::Point>;

    fn solver_calls(&self) -> u64 {
        self.solver_counter().get()
    }

    /// Counted entry point to the solver for an explicit support set.
    /// Weights are renormalized over the support.
    fn frechet_mean_of(&self, support: &[&Self::Point], weights: &[f64]) -> Result<Self::Point> {
        if support.len() != weights.len() {
            return Err(MrfError::LengthMismatch {
                expected: support.len(),
                found: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if support.is_empty() || total <= 0.0 {
            return Err(MrfError::DegenerateWeights);
        }
        self.solver_counter().increment();
        if (total - 1.0).abs() > f64::EPSILON * 4.0 {
            let rescaled: Vec<f64> = weights.iter().map(|w| w / total).collect();
            self.solve_frechet_mean(support, &rescaled)
        } else {
            self.solve_frechet_mean(support, weights)
        }
    }

    /// Weighted Fréchet mean of `samples` under `weights`; zero-weight
    /// samples are dropped before the solve.
    fn weighted_frechet_mean(
        &self,
        samples: &[Self::Point],
        weights: &WeightVector,
    ) -> Result<Self::Point> {
        if samples.len() != weights.len() {
            return Err(MrfError::LengthMismatch {
                expected: samples.len(),
                found: weights.len(),
            });
        }
        if weights.is_degenerate() {
            return Err(MrfError::DegenerateWeights);
        }
        let (support, w): (Vec<&Self::Point>, Vec<f64>) =
            weights.support().map(|(i, w)| (&samples[i], w)).unzip();
        self.frechet_mean_of(&support, &w)
    }
}

/// `Σ wᵢ d(ω, pᵢ)²`.
pub fn frechet_functional<S: MetricSpace>(
    space: &S,
    support: &[&S::Point],
    weights: &[f64],
    at: &S::Point,
) -> Result<f64> {
    let mut total = 0.0;
    for (p, w) in support.iter().zip(weights) {
        let d = space.distance(at, p)?;
        total += w * d * d;
    }
    Ok(total)
}

/// Dense symmetric matrix of pairwise response distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    squared: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from the strict upper triangle, row-major.
    fn from_upper(n: usize, upper: Vec<Vec<f64>>) -> Self {
        let mut entries = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (offset, d) in row.into_iter().enumerate() {
                let j = i + 1 + offset;
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        let squared = entries.iter().map(|d| d * d).collect();
        Self {
            n,
            entries,
            squared,
        }
    }

    /// Wraps a full matrix, checking symmetry, zero diagonal and
    /// non-negativity.
    pub fn from_full(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(MrfError::LengthMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(MrfError::Config(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let d = entries[i * n + j];
                if d != entries[j * n + i] || d.is_nan() || d < 0.0 {
                    return Err(MrfError::Config(format!(
                        "entry ({i}, {j}) is not a valid symmetric distance"
                    )));
                }
            }
        }
        let squared = entries.iter().map(|d| d * d).collect();
        Ok(Self {
            n,
            entries,
            squared,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn get_squared(&self, i: usize, j: usize) -> f64 {
        self.squared[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn squared_row(&self, i: usize) -> &[f64] {
        &self.squared[i * self.n..(i + 1) * self.n]
    }
}

/// Pairwise distances of `samples`. Only the upper triangle is evaluated.
pub fn distance_matrix<S: MetricSpace>(space: &S, samples: &[S::Point]) -> Result<DistanceMatrix> {
    for (i, p) in samples.iter().enumerate() {
        space.validate(p).map_err(|e| e.at_sample(i))?;
    }
    let n = samples.len();
    let upper = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| {
                    space
                        .distance(&samples[i], &samples[j])
                        .map_err(|e| e.at_sample(j))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceMatrix::from_upper(n, upper))
}

fn check_mask(dm: &DistanceMatrix, mask: &[usize]) -> Result<()> {
    if mask.is_empty() {
        return Err(MrfError::EmptyMask);
    }
    if let Some(&bad) = mask.iter().find(|&&i| i >= dm.len()) {
        return Err(MrfError::LengthMismatch {
            expected: dm.len(),
            found: bad + 1,
        });
    }
    Ok(())
}

/// Index in `mask` minimizing the sum of squared distances to the rest of
/// `mask`. Ties go to the lowest index.
pub fn frechet_medoid(dm: &DistanceMatrix, mask: &[usize]) -> Result<usize> {
    check_mask(dm, mask)?;
    let mut best = (f64::INFINITY, usize::MAX);
    for &i in mask {
        let row = dm.squared_row(i);
        let cost: f64 = mask.iter().map(|&j| row[j]).sum();
        if cost < best.0 || (cost == best.0 && i < best.1) {
            best = (cost, i);
        }
    }
    Ok(best.1)
}

/// Mean squared distance from `center` to the members of `mask`.
pub fn frechet_variance(dm: &DistanceMatrix, mask: &[usize], center: usize) -> Result<f64> {
    check_mask(dm, mask)?;
    if !mask.contains(&center) {
        return Err(MrfError::CenterNotInMask(center));
    }
    let row = dm.squared_row(center);
    let total: f64 = mask.iter().map(|&j| row[j]).sum();
    Ok(total / mask.len() as f64)
}

/// Support point minimizing the weighted Fréchet functional over the
/// support itself. Used to seed the iterative solvers. Returns the position
/// in `support` and the pairwise distance maximum.
pub(crate) fn weighted_medoid<S: MetricSpace>(
    space: &S,
    support: &[&S::Point],
    weights: &[f64],
) -> Result<(usize, f64)> {
    let m = support.len();
    let mut dist = vec![0.0; m * m];
    let mut max_pair = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = space.distance(support[i], support[j])?;
            dist[i * m + j] = d;
            dist[j * m + i] = d;
            max_pair = max_pair.max(d);
        }
    }
    let mut best = (f64::INFINITY, 0);
    for i in 0..m {
        let cost: f64 = (0..m)
            .map(|j| {
                let d = dist[i * m + j];
                weights[j] * d * d
            })
            .sum();
        if cost < best.0 {
            best = (cost, i);
        }
    }
    Ok((best.1, max_pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::EuclideanSpace;

    fn line(values: &[f64]) -> DistanceMatrix {
        distance_matrix(&EuclideanSpace::new(), values).unwrap()
    }

    #[test]
    fn single_sample_matrix() {
        let dm = line(&[4.0]);
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);
    }

    #[test]
    fn two_point_matrix() {
        let dm = line(&[0.0, 3.0]);
        assert_eq!(dm.row(0), &[0.0, 3.0]);
        assert_eq!(dm.row(1), &[3.0, 0.0]);
    }

    #[test]
    fn medoid_examples() {
        let dm = line(&[0.0, 1.0, 2.0, 5.0]);
        assert_eq!(frechet_medoid(&dm, &[3]).unwrap(), 3);
        assert_eq!(frechet_medoid(&dm, &[0, 1, 2]).unwrap(), 1);
        let tied = line(&[0.0, 0.0]);
        assert_eq!(frechet_medoid(&tied, &[1, 0]).unwrap(), 0);
        assert!(matches!(frechet_medoid(&dm, &[]), Err(MrfError::EmptyMask)));
    }

    #[test]
    fn variance_examples() {
        let dm = line(&[0.0, 1.0, 2.0]);
        assert_eq!(frechet_variance(&dm, &[2], 2).unwrap(), 0.0);
        let pair = line(&[0.0, 2.0]);
        assert_eq!(frechet_variance(&pair, &[0, 1], 0).unwrap(), 2.0);
        let v = frechet_variance(&dm, &[0, 1, 2], 1).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            frechet_variance(&dm, &[0, 1], 2),
            Err(MrfError::CenterNotInMask(2))
        ));
        assert!(frechet_variance(&dm, &[], 0).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.0, 0.0]).unwrap().is_degenerate());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        let w = WeightVector::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn full_matrix_rejects_asymmetry() {
        assert!(DistanceMatrix::from_full(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(DistanceMatrix::from_full(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_full(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn degenerate_weights_rejected_by_solver() {
        let space = EuclideanSpace::new();
        let w = WeightVector::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            space.weighted_frechet_mean(&[1.0, 2.0], &w),
            Err(MrfError::DegenerateWeights)
        ));
        assert_eq!(space.solver_calls(), 0);
    }
}
