//! Split search for one cell.
//!
//! A cell is a list of training indices. For a feature `j`, candidate
//! thresholds sit at midpoints between consecutive distinct sorted values of
//! `x[·][j]`, and a threshold is admissible when both children satisfy
//! [`SplitConstraints`]. Points with `x[j] <= z` go left.
//!
//! Scores are all on the scale `(1/|C|) Σ_children Σ_i d(Y_i, center)²`:
//! with child medoids as centers for the medoid rule, and child Fréchet
//! means for the exact and 2-means rules. Scans run over features in the
//! given order and thresholds left to right; the first minimum wins, with
//! scores within [`TIE_TOLERANCE`] of each other treated as equal.

use crate::error::{MrfError, Result};
use crate::forest::{Covariates, SplitConstraints};
use crate::metric::{DistanceMatrix, MetricSpace};

/// Lloyd iterations for the 1-D 2-means threshold.
pub const TWO_MEANS_MAX_ITER: usize = 50;

/// Margin by which a later candidate must beat the incumbent. Scores of the
/// same partition reached through different features can differ by rounding;
/// this keeps the scan-order tie-break stable.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub score: f64,
    /// Points sent to the left child.
    pub left_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdScore {
    pub left_count: usize,
    pub threshold: f64,
    pub score: f64,
}

/// Cell indices ordered by `(x[·][feature], index)`.
fn sort_by_feature(cell: &[usize], x: &Covariates, feature: usize) -> Vec<usize> {
    let mut sorted = cell.to_vec();
    sorted.sort_by(|&a, &b| {
        x.get(a, feature)
            .total_cmp(&x.get(b, feature))
            .then(a.cmp(&b))
    });
    sorted
}

/// `(left_count, threshold)` for every admissible cut of a sorted cell.
fn admissible_cuts<'a>(
    sorted: &'a [usize],
    x: &'a Covariates,
    feature: usize,
    constraints: SplitConstraints,
) -> impl Iterator<Item = (usize, f64)> + 'a {
    let m = sorted.len();
    (1..m).filter_map(move |t| {
        let lo = x.get(sorted[t - 1], feature);
        let hi = x.get(sorted[t], feature);
        (lo < hi && constraints.admits(m, t)).then_some((t, 0.5 * (lo + hi)))
    })
}

fn pick_best(
    best: &mut Option<SplitCandidate>,
    feature: usize,
    scores: impl IntoIterator<Item = ThresholdScore>,
) {
    for s in scores {
        if best.is_none_or(|b| s.score < b.score - TIE_TOLERANCE) {
            *best = Some(SplitCandidate {
                feature,
                threshold: s.threshold,
                score: s.score,
                left_count: s.left_count,
            });
        }
    }
}

/// Squared distances restricted to a cell, members in ascending index order
/// so that argmin scans break ties towards the lowest index.
struct LocalCell {
    members: Vec<usize>,
    squared: Vec<f64>,
    totals: Vec<f64>,
}

impl LocalCell {
    fn new(cell: &[usize], dm: &DistanceMatrix) -> Self {
        let mut members = cell.to_vec();
        members.sort_unstable();
        let m = members.len();
        let mut squared = Vec::with_capacity(m * m);
        for &a in &members {
            let row = dm.squared_row(a);
            squared.extend(members.iter().map(|&b| row[b]));
        }
        let totals = squared.chunks(m).map(|r| r.iter().sum()).collect();
        Self {
            members,
            squared,
            totals,
        }
    }

    fn all_identical(&self) -> bool {
        let m = self.members.len();
        self.squared[..m].iter().all(|d| *d == 0.0)
    }

    /// Medoid scores for every admissible threshold of `feature`, by one
    /// left-to-right sweep. Each step moves one point left and updates every
    /// candidate's left sum in O(m); medoid lookups are O(m) as well.
    fn sweep(&self, x: &Covariates, feature: usize, constraints: SplitConstraints) -> Vec<ThresholdScore> {
        let m = self.members.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            x.get(self.members[a], feature)
                .total_cmp(&x.get(self.members[b], feature))
                .then(a.cmp(&b))
        });
        let value = |local: usize| x.get(self.members[local], feature);

        let mut left_sums = vec![0.0; m];
        let mut in_left = vec![false; m];
        let mut out = Vec::new();
        for t in 1..m {
            let moved = order[t - 1];
            in_left[moved] = true;
            for (c, sum) in left_sums.iter_mut().enumerate() {
                *sum += self.squared[c * m + moved];
            }
            let (lo, hi) = (value(order[t - 1]), value(order[t]));
            if lo >= hi || !constraints.admits(m, t) {
                continue;
            }
            let mut left_best = f64::INFINITY;
            let mut right_best = f64::INFINITY;
            for c in 0..m {
                if in_left[c] {
                    if left_sums[c] < left_best {
                        left_best = left_sums[c];
                    }
                } else {
                    let right = self.totals[c] - left_sums[c];
                    if right < right_best {
                        right_best = right;
                    }
                }
            }
            out.push(ThresholdScore {
                left_count: t,
                threshold: 0.5 * (lo + hi),
                score: (left_best + right_best) / m as f64,
            });
        }
        out
    }
}

/// Medoid-criterion score of every admissible threshold on `feature`.
pub fn medoid_split_scores(
    cell: &[usize],
    x: &Covariates,
    feature: usize,
    dm: &DistanceMatrix,
    constraints: SplitConstraints,
) -> Vec<ThresholdScore> {
    if cell.len() < 2 {
        return Vec::new();
    }
    LocalCell::new(cell, dm).sweep(x, feature, constraints)
}

fn search_medoid(
    local: &LocalCell,
    x: &Covariates,
    features: &[usize],
    constraints: SplitConstraints,
) -> Option<SplitCandidate> {
    let mut best = None;
    for &j in features {
        pick_best(&mut best, j, local.sweep(x, j, constraints));
    }
    best
}

/// Best split under the medoid criterion. `None` when the cell is smaller
/// than `2k`, all its responses coincide, or no threshold is admissible.
pub fn best_split_medoid(
    cell: &[usize],
    x: &Covariates,
    features: &[usize],
    dm: &DistanceMatrix,
    constraints: SplitConstraints,
) -> Option<SplitCandidate> {
    if cell.len() < 2 * constraints.min_leaf || cell.len() < 2 {
        return None;
    }
    let local = LocalCell::new(cell, dm);
    if local.all_identical() {
        return None;
    }
    search_medoid(&local, x, features, constraints)
}

/// `Σ d(Y_i, ω̂)²` over `members`, with `ω̂` their unweighted Fréchet mean.
fn child_sum_of_squares<S: MetricSpace>(
    space: &S,
    responses: &[S::Point],
    members: &[usize],
) -> Result<f64> {
    let support: Vec<&S::Point> = members.iter().map(|&i| &responses[i]).collect();
    let weights = vec![1.0 / members.len() as f64; members.len()];
    let center = space.frechet_mean_of(&support, &weights)?;
    let mut total = 0.0;
    for p in support {
        let d = space.distance(p, &center)?;
        total += d * d;
    }
    Ok(total)
}

fn exact_score<S: MetricSpace>(
    space: &S,
    responses: &[S::Point],
    sorted: &[usize],
    left_count: usize,
    feature: usize,
    threshold: f64,
) -> Result<f64> {
    let wrap = |e| MrfError::Split {
        feature,
        threshold,
        source: Box::new(e),
    };
    let (left, right) = sorted.split_at(left_count);
    let l = child_sum_of_squares(space, responses, left).map_err(wrap)?;
    let r = child_sum_of_squares(space, responses, right).map_err(wrap)?;
    Ok((l + r) / sorted.len() as f64)
}

/// Exact CART score of every admissible threshold on `feature`. Two solver
/// calls per threshold.
pub fn exact_split_scores<S: MetricSpace>(
    cell: &[usize],
    x: &Covariates,
    feature: usize,
    space: &S,
    responses: &[S::Point],
    constraints: SplitConstraints,
) -> Result<Vec<ThresholdScore>> {
    let sorted = sort_by_feature(cell, x, feature);
    admissible_cuts(&sorted, x, feature, constraints)
        .map(|(t, z)| {
            Ok(ThresholdScore {
                left_count: t,
                threshold: z,
                score: exact_score(space, responses, &sorted, t, feature, z)?,
            })
        })
        .collect()
}

fn responses_identical<S: MetricSpace>(
    space: &S,
    responses: &[S::Point],
    cell: &[usize],
) -> Result<bool> {
    let first = &responses[cell[0]];
    for &i in &cell[1..] {
        if space.distance(first, &responses[i])? != 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn search_exact<S: MetricSpace>(
    cell: &[usize],
    x: &Covariates,
    features: &[usize],
    space: &S,
    responses: &[S::Point],
    constraints: SplitConstraints,
) -> Result<Option<SplitCandidate>> {
    let mut best = None;
    for &j in features {
        let scores = exact_split_scores(cell, x, j, space, responses, constraints)?;
        pick_best(&mut best, j, scores);
    }
    Ok(best)
}

/// Best split under the exact CART criterion.
pub fn best_split_exact<S: MetricSpace>(
    cell: &[usize],
    x: &Covariates,
    features: &[usize],
    space: &S,
    responses: &[S::Point],
    constraints: SplitConstraints,
) -> Result<Option<SplitCandidate>> {
    if cell.len() < 2 * constraints.min_leaf || cell.len() < 2 {
        return Ok(None);
    }
    if responses_identical(space, responses, cell)? {
        return Ok(None);
    }
    search_exact(cell, x, features, space, responses, constraints)
}

/// 1-D 2-means on sorted values by Lloyd's algorithm, started from the
/// minimum and maximum. Returns the size of the lower cluster and the
/// midpoint between the clusters, or `None` when all values are equal.
pub fn two_means_cut(sorted_values: &[f64]) -> Option<(usize, f64)> {
    let m = sorted_values.len();
    if m < 2 || sorted_values[0] == sorted_values[m - 1] {
        return None;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (mut lo, mut hi) = (sorted_values[0], sorted_values[m - 1]);
    let mut split = 0;
    for _ in 0..TWO_MEANS_MAX_ITER {
        // values are sorted, so the lower cluster is a prefix; ties go low
        let next = sorted_values.partition_point(|v| (v - lo).abs() <= (hi - v).abs());
        if next == split {
            break;
        }
        split = next;
        lo = mean(&sorted_values[..split]);
        hi = mean(&sorted_values[split..]);
    }
    Some((split, 0.5 * (sorted_values[split - 1] + sorted_values[split])))
}

fn search_two_means<S: MetricSpace>(
    cell: &[usize],
    x: &Covariates,
    features: &[usize],
    space: &S,
    responses: &[S::Point],
    constraints: SplitConstraints,
) -> Result<Option<SplitCandidate>> {
    let mut best = None;
    for &j in features {
        let sorted = sort_by_feature(cell, x, j);
        let values: Vec<f64> = sorted.iter().map(|&i| x.get(i, j)).collect();
        let Some((t, z)) = two_means_cut(&values) else {
            continue;
        };
        if !constraints.admits(sorted.len(), t) {
            continue;
        }
        let score = exact_score(space, responses, &sorted, t, j, z)?;
        pick_best(
            &mut best,
            j,
            [ThresholdScore {
                left_count: t,
                threshold: z,
                score,
            }],
        );
    }
    Ok(best)
}

/// Best of the per-feature 2-means cuts, each scored by the exact CART
/// criterion. Features whose values are all equal, or whose cut violates
/// the size constraints, are skipped without solver calls; every other
/// feature costs exactly two.
pub fn best_split_two_means<S: MetricSpace>(
    cell: &[usize],
    x: &Covariates,
    features: &[usize],
    space: &S,
    responses: &[S::Point],
    constraints: SplitConstraints,
) -> Result<Option<SplitCandidate>> {
    if cell.len() < 2 * constraints.min_leaf || cell.len() < 2 {
        return Ok(None);
    }
    if responses_identical(space, responses, cell)? {
        return Ok(None);
    }
    search_two_means(cell, x, features, space, responses, constraints)
}

/// Result of searching one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitOutcome {
    Split(SplitCandidate),
    NoAdmissibleSplit,
    /// All responses in the cell coincide.
    ZeroGain,
}

/// A split rule bound to the data it needs.
pub enum Splitter<'a, S: MetricSpace> {
    Medoid(&'a DistanceMatrix),
    Exact { space: &'a S, responses: &'a [S::Point] },
    TwoMeans { space: &'a S, responses: &'a [S::Point] },
}

impl<S: MetricSpace> Splitter<'_, S> {
    /// Searches `cell`; callers guarantee `|cell| >= 2k`.
    pub fn search(
        &self,
        cell: &[usize],
        x: &Covariates,
        features: &[usize],
        constraints: SplitConstraints,
    ) -> Result<SplitOutcome> {
        let found = match self {
            Splitter::Medoid(dm) => {
                let local = LocalCell::new(cell, dm);
                if local.all_identical() {
                    return Ok(SplitOutcome::ZeroGain);
                }
                search_medoid(&local, x, features, constraints)
            }
            Splitter::Exact { space, responses } => {
                if responses_identical(*space, responses, cell)? {
                    return Ok(SplitOutcome::ZeroGain);
                }
                search_exact(cell, x, features, *space, responses, constraints)?
            }
            Splitter::TwoMeans { space, responses } => {
                if responses_identical(*space, responses, cell)? {
                    return Ok(SplitOutcome::ZeroGain);
                }
                search_two_means(cell, x, features, *space, responses, constraints)?
            }
        };
        Ok(found.map_or(SplitOutcome::NoAdmissibleSplit, SplitOutcome::Split))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::distance_matrix;
    use crate::spaces::EuclideanSpace;

    fn pure_example() -> (Covariates, Vec<f64>) {
        let x = Covariates::from_rows(&[vec![0.1], vec![0.2], vec![0.8], vec![0.9]]).unwrap();
        (x, vec![0.0, 0.0, 1.0, 1.0])
    }

    const LOOSE: SplitConstraints = SplitConstraints {
        min_leaf: 1,
        balance_alpha: 0.25,
    };

    #[test]
    fn medoid_pure_split() {
        let (x, y) = pure_example();
        let dm = distance_matrix(&EuclideanSpace::new(), &y).unwrap();
        let cell = [0, 1, 2, 3];
        // brute force over the three admissible cuts: 1 | 3 scores 1/4,
        // 2 | 2 scores 0, 3 | 1 scores 1/4
        let scores = medoid_split_scores(&cell, &x, 0, &dm, LOOSE);
        let s: Vec<f64> = scores.iter().map(|s| s.score).collect();
        assert_eq!(s, vec![0.25, 0.0, 0.25]);
        let best = best_split_medoid(&cell, &x, &[0], &dm, LOOSE).unwrap();
        assert_eq!(best.feature, 0);
        assert!(best.threshold > 0.2 && best.threshold < 0.8);
        assert_eq!(best.score, 0.0);
        assert_eq!(best.left_count, 2);
    }

    #[test]
    fn medoid_none_cases() {
        let (x, _) = pure_example();
        let flat = distance_matrix(&EuclideanSpace::new(), &[0.5; 4]).unwrap();
        assert!(best_split_medoid(&[0, 1, 2, 3], &x, &[0], &flat, LOOSE).is_none());
        let (_, y) = pure_example();
        let dm = distance_matrix(&EuclideanSpace::new(), &y).unwrap();
        let strict = SplitConstraints {
            min_leaf: 3,
            balance_alpha: 0.05,
        };
        assert!(best_split_medoid(&[0, 1, 2, 3], &x, &[0], &dm, strict).is_none());
    }

    #[test]
    fn exact_pure_split_and_accounting() {
        let (x, y) = pure_example();
        let space = EuclideanSpace::new();
        let best = best_split_exact(&[0, 1, 2, 3], &x, &[0], &space, &y, LOOSE)
            .unwrap()
            .unwrap();
        assert_eq!(best.score, 0.0);
        assert!(best.threshold > 0.2 && best.threshold < 0.8);
        assert_eq!(space.solver_calls(), 2 * 3);
    }

    #[test]
    fn two_means_examples() {
        assert_eq!(two_means_cut(&[0.1, 0.2, 0.8, 0.9]), Some((2, 0.5)));
        assert_eq!(two_means_cut(&[0.3, 0.3, 0.3]), None);
        // first pass puts 5.1 high (centers 0, 10); the second pass moves it
        // low (centers 3.3, 7.55)
        let (t, z) = two_means_cut(&[0.0, 4.9, 5.0, 5.1, 10.0]).unwrap();
        assert_eq!(t, 4);
        assert!((z - 7.55).abs() < 1e-12);
    }

    #[test]
    fn two_means_accounting() {
        let x = Covariates::from_rows(&[
            vec![0.1, 0.5],
            vec![0.2, 0.5],
            vec![0.8, 0.5],
            vec![0.9, 0.5],
        ])
        .unwrap();
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let space = EuclideanSpace::new();
        let best = best_split_two_means(&[0, 1, 2, 3], &x, &[0, 1], &space, &y, LOOSE)
            .unwrap()
            .unwrap();
        assert_eq!(best.feature, 0);
        assert_eq!(best.threshold, 0.5);
        // feature 1 is constant and costs nothing
        assert_eq!(space.solver_calls(), 2);
    }

    #[test]
    fn tied_coordinates_are_never_separated() {
        let x = Covariates::from_rows(&[vec![0.5], vec![0.5], vec![0.5], vec![0.7]]).unwrap();
        let y = vec![0.0, 1.0, 2.0, 3.0];
        let dm = distance_matrix(&EuclideanSpace::new(), &y).unwrap();
        let scores = medoid_split_scores(&[0, 1, 2, 3], &x, 0, &dm, LOOSE);
        assert_eq!(scores.len(), 1);
        assert_eq!(scores[0].left_count, 3);
        assert_eq!(scores[0].threshold, 0.6);
    }
}
