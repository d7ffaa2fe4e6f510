//! Honest, α-balanced regression forests over metric responses.

mod config;
mod model;
pub mod split;
mod tree;

pub use config::{ForestConfig, SplitConstraints, SplitRule};
pub use model::{fit, ForestModel};
pub use split::{SplitCandidate, Splitter, ThresholdScore};
pub use tree::{build_tree, Leaf, Node, StopReason, Tree};

use crate::error::{MrfError, Result};

/// Row-major `n × d` covariate matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Covariates {
    pub fn from_flat(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(MrfError::Config("covariate dimension must be positive".into()));
        }
        if data.len() != n * d {
            return Err(MrfError::LengthMismatch {
                expected: n * d,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(MrfError::invalid(
                "covariate",
                format!("row {} column {} is {} (outside [0, 1])", pos / d, pos % d, data[pos]),
            ));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(MrfError::LengthMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::from_flat(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(MrfError::LengthMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MrfError::invalid("covariate", format!("{v} outside [0, 1]")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariate_validation() {
        let x = Covariates::from_rows(&[vec![0.1, 0.2], vec![0.3, 1.0]]).unwrap();
        assert_eq!(x.get(1, 0), 0.3);
        assert_eq!(x.row(0), &[0.1, 0.2]);
        assert!(Covariates::from_rows(&[vec![0.1], vec![1.2]]).is_err());
        assert!(Covariates::from_rows(&[vec![0.1], vec![0.2, 0.3]]).is_err());
        assert!(x.check_query(&[0.5]).is_err());
        assert!(x.check_query(&[0.5, -0.1]).is_err());
    }
}
