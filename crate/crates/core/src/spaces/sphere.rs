//! The unit sphere `S² ⊂ ℝ³` with the great-circle distance.

use std::f64::consts::PI;

use crate::error::{MrfError, Result};
use crate::metric::{weighted_medoid, MetricSpace, SolverCounter, WeightVector};
use crate::spaces::hypersphere::{self, Dot, InnerProduct, KarcherSettings};

const UNIT_TOLERANCE: f64 = 1e-9;
/// Pairwise distances must stay below `π - HEMISPHERE_MARGIN`.
const HEMISPHERE_MARGIN: f64 = 1e-6;
const KARCHER: KarcherSettings = KarcherSettings {
    name: "sphere Karcher mean",
    tolerance: 1e-9,
    max_iterations: 200,
};

/// A unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint([f64; 3]);

impl SpherePoint {
    pub fn new(coords: [f64; 3]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MrfError::invalid("sphere", "non-finite coordinate"));
        }
        let norm = Dot.norm(&coords);
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(MrfError::invalid(
                "sphere",
                format!("norm {norm} is not 1"),
            ));
        }
        Ok(Self(coords))
    }

    /// Projects a nonzero vector radially onto the sphere.
    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        let norm = Dot.norm(&v);
        if norm <= 0.0 || !norm.is_finite() {
            return Err(MrfError::invalid("sphere", "cannot normalize zero vector"));
        }
        Self::new(v.map(|c| c / norm))
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    fn from_slice(v: &[f64]) -> Self {
        Self([v[0], v[1], v[2]])
    }
}

/// Geodesic walk from `base` along `tangent`. Components of `tangent`
/// normal to `base` are removed first.
pub fn sphere_exp(base: &SpherePoint, tangent: [f64; 3]) -> SpherePoint {
    SpherePoint::from_slice(&hypersphere::exp_map(&Dot, &base.0, &tangent))
}

/// Inverse of [`sphere_exp`]; fails on antipodal pairs.
pub fn sphere_log(base: &SpherePoint, target: &SpherePoint) -> Result<[f64; 3]> {
    let v = hypersphere::log_map(&Dot, &base.0, &target.0)?;
    Ok([v[0], v[1], v[2]])
}

fn sphere_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    hypersphere::angle(&Dot, &a.0, &b.0)
}

fn karcher(support: &[&SpherePoint], weights: &[f64]) -> Result<SpherePoint> {
    let space = SphereSpace::new();
    let (start, max_pair) = weighted_medoid(&space, support, weights)?;
    if max_pair >= PI - HEMISPHERE_MARGIN {
        return Err(MrfError::NotInHemisphere(max_pair));
    }
    let coords: Vec<&[f64]> = support.iter().map(|p| p.0.as_slice()).collect();
    let mu = hypersphere::karcher_mean(&Dot, &coords, weights, &support[start].0, &KARCHER)?;
    Ok(SpherePoint::from_slice(&mu))
}

/// Weighted Karcher mean by Riemannian gradient descent with unit step,
/// started at the weighted medoid. Uncounted; [`SphereSpace`] counts.
pub fn sphere_karcher_mean(samples: &[SpherePoint], weights: &WeightVector) -> Result<SpherePoint> {
    if samples.len() != weights.len() {
        return Err(MrfError::LengthMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    let (support, w): (Vec<&SpherePoint>, Vec<f64>) =
        weights.support().map(|(i, w)| (&samples[i], w)).unzip();
    if support.is_empty() {
        return Err(MrfError::DegenerateWeights);
    }
    karcher(&support, &w)
}

#[derive(Debug, Default)]
pub struct SphereSpace {
    counter: SolverCounter,
}

impl SphereSpace {
    pub fn new() -> Self {
        Self::default()
    }
}

impl MetricSpace for SphereSpace {
    type Point = SpherePoint;

    fn name(&self) -> &'static str {
        "sphere"
    }

    fn validate(&self, point: &SpherePoint) -> Result<()> {
        SpherePoint::new(point.0).map(|_| ())
    }

    fn distance(&self, a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
        Ok(sphere_distance(a, b))
    }

    fn solve_frechet_mean(&self, support: &[&SpherePoint], weights: &[f64]) -> Result<SpherePoint> {
        karcher(support, weights)
    }

    fn solver_counter(&self) -> &SolverCounter {
        &self.counter
    }

    fn payload_width(&self) -> usize {
        3
    }

    fn encode(&self, point: &SpherePoint) -> Vec<f64> {
        point.0.to_vec()
    }

    fn decode(&self, payload: &[f64]) -> Result<SpherePoint> {
        if payload.len() != 3 {
            return Err(MrfError::LengthMismatch {
                expected: 3,
                found: payload.len(),
            });
        }
        SpherePoint::new([payload[0], payload[1], payload[2]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    const E1: [f64; 3] = [1.0, 0.0, 0.0];
    const E2: [f64; 3] = [0.0, 1.0, 0.0];
    const E3: [f64; 3] = [0.0, 0.0, 1.0];

    fn p(c: [f64; 3]) -> SpherePoint {
        SpherePoint::new(c).unwrap()
    }

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn distance_examples() {
        let s = SphereSpace::new();
        assert_eq!(s.distance(&p(E1), &p(E1)).unwrap(), 0.0);
        assert!((s.distance(&p(E1), &p(E2)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((s.distance(&p(E1), &p([-1.0, 0.0, 0.0])).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unit() {
        assert!(SpherePoint::new([1.0, 1.0, 0.0]).is_err());
        assert!(SphereSpace::new().decode(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn exp_examples() {
        let north = p(E3);
        assert_eq!(sphere_exp(&north, [0.0; 3]), north);
        let q = sphere_exp(&north, [FRAC_PI_2, 0.0, 0.0]);
        assert!(close(q.coords(), E1, 1e-15));
        let anti = sphere_exp(&north, [PI, 0.0, 0.0]);
        assert!(close(anti.coords(), [0.0, 0.0, -1.0], 1e-15));
    }

    #[test]
    fn exp_projects_non_tangent_input() {
        let north = p(E3);
        let q = sphere_exp(&north, [FRAC_PI_2, 0.0, 5.0]);
        assert!(close(q.coords(), E1, 1e-15));
    }

    #[test]
    fn log_examples() {
        let north = p(E3);
        assert_eq!(sphere_log(&north, &north).unwrap(), [0.0; 3]);
        let v = sphere_log(&north, &p(E1)).unwrap();
        assert!(close(v, [FRAC_PI_2, 0.0, 0.0], 1e-15));
        assert!(matches!(
            sphere_log(&north, &p([0.0, 0.0, -1.0])),
            Err(MrfError::CutLocus)
        ));
    }

    #[test]
    fn karcher_examples() {
        let s = SphereSpace::new();
        let single = s
            .weighted_frechet_mean(&[p(E2)], &WeightVector::uniform(1))
            .unwrap();
        assert_eq!(single, p(E2));
        let mid = s
            .weighted_frechet_mean(&[p(E1), p(E2)], &WeightVector::uniform(2))
            .unwrap();
        assert!(close(mid.coords(), [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0], 1e-12));
        assert_eq!(s.solver_calls(), 2);
    }

    #[test]
    fn karcher_rejects_antipodal_support() {
        let r = sphere_karcher_mean(&[p(E1), p([-1.0, 0.0, 0.0])], &WeightVector::uniform(2));
        assert!(matches!(r, Err(MrfError::NotInHemisphere(_))));
    }
}
