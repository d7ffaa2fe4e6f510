use crate::error::{MrfError, Result};
use crate::metric::{MetricSpace, SolverCounter};

/// The real line (or a closed interval of it) with `|a - b|`.
///
/// Every Fréchet quantity has a closed form here, which makes it the oracle
/// space for the forest.
#[derive(Debug, Default)]
pub struct EuclideanSpace {
    bounds: Option<(f64, f64)>,
    counter: SolverCounter,
}

impl EuclideanSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Restricts valid points to `[lo, hi]`.
    pub fn bounded(lo: f64, hi: f64) -> Self {
        Self {
            bounds: Some((lo, hi)),
            counter: SolverCounter::new(),
        }
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }
}

impl MetricSpace for EuclideanSpace {
    type Point = f64;

    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn validate(&self, point: &f64) -> Result<()> {
        if !point.is_finite() {
            return Err(MrfError::invalid("euclidean", "value is not finite"));
        }
        if let Some((lo, hi)) = self.bounds {
            if *point < lo || *point > hi {
                return Err(MrfError::invalid(
                    "euclidean",
                    format!("{point} outside [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    fn distance(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok((a - b).abs())
    }

    fn solve_frechet_mean(&self, support: &[&f64], weights: &[f64]) -> Result<f64> {
        Ok(support.iter().zip(weights).map(|(y, w)| w * **y).sum())
    }

    fn solver_counter(&self) -> &SolverCounter {
        &self.counter
    }

    fn payload_width(&self) -> usize {
        1
    }

    fn encode(&self, point: &f64) -> Vec<f64> {
        vec![*point]
    }

    fn decode(&self, payload: &[f64]) -> Result<f64> {
        if payload.len() != 1 {
            return Err(MrfError::LengthMismatch {
                expected: 1,
                found: payload.len(),
            });
        }
        self.validate(&payload[0])?;
        Ok(payload[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::WeightVector;

    #[test]
    fn arithmetic_mean() {
        let space = EuclideanSpace::new();
        let m = space
            .weighted_frechet_mean(&[1.0, 3.0], &WeightVector::uniform(2))
            .unwrap();
        assert_eq!(m, 2.0);
        assert_eq!(space.solver_calls(), 1);
        let single = space
            .weighted_frechet_mean(&[1.0, 3.0, 7.0], &WeightVector::point_mass(3, 2))
            .unwrap();
        assert_eq!(single, 7.0);
        assert_eq!(space.solver_calls(), 2);
    }

    #[test]
    fn bounds_are_enforced() {
        let space = EuclideanSpace::bounded(-1.0, 2.0);
        assert!(space.validate(&1.5).is_ok());
        assert!(space.validate(&2.5).is_err());
        assert!(space.validate(&f64::NAN).is_err());
    }
}
