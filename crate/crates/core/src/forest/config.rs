use std::fmt;
use std::str::FromStr;

use crate::error::{MrfError, Result};

/// How candidate splits are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitRule {
    /// Child Fréchet means replaced by child medoids, read off a
    /// precomputed distance matrix. No solver calls while fitting.
    Medoid,
    /// Exact CART criterion: two solver calls per admissible threshold.
    ExactFrechet,
    /// One 2-means threshold per feature, scored exactly.
    TwoMeans,
}

impl SplitRule {
    pub const ALL: [SplitRule; 3] = [SplitRule::Medoid, SplitRule::ExactFrechet, SplitRule::TwoMeans];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitRule::Medoid => "medoid",
            SplitRule::ExactFrechet => "exact_frechet",
            SplitRule::TwoMeans => "two_means",
        }
    }
}

impl fmt::Display for SplitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitRule {
    type Err = MrfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "medoid" | "mrf" => Ok(SplitRule::Medoid),
            "exact_frechet" | "exact" | "cart" => Ok(SplitRule::ExactFrechet),
            "two_means" | "2means" | "2-means" => Ok(SplitRule::TwoMeans),
            other => Err(MrfError::Config(format!("unknown split rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Fraction of the sample drawn without replacement for each tree.
    pub subsample_fraction: f64,
    /// Split each subsample into a half that chooses splits and a half that
    /// populates leaves.
    pub honesty: bool,
    /// `k`: leaves hold between `k` and `2k - 1` split-half points.
    pub min_leaf: usize,
    pub balance_alpha: f64,
    /// Features tried per node; `None` tries all of them.
    pub mtry: Option<usize>,
    pub split_rule: SplitRule,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            subsample_fraction: 0.5,
            honesty: true,
            min_leaf: 5,
            balance_alpha: 0.05,
            mtry: None,
            split_rule: SplitRule::Medoid,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_rule(split_rule: SplitRule) -> Self {
        Self {
            split_rule,
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(MrfError::Config("n_trees must be positive".into()));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(MrfError::Config(format!(
                "subsample fraction {} outside (0, 1]",
                self.subsample_fraction
            )));
        }
        if self.min_leaf == 0 {
            return Err(MrfError::Config("min_leaf must be at least 1".into()));
        }
        if !(self.balance_alpha > 0.0 && self.balance_alpha <= 0.5) {
            return Err(MrfError::Config(format!(
                "balance alpha {} outside (0, 0.5]",
                self.balance_alpha
            )));
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > d {
                return Err(MrfError::Config(format!("mtry {m} outside 1..={d}")));
            }
        }
        if n < 2 * self.min_leaf {
            return Err(MrfError::Config(format!(
                "{n} observations cannot fill two leaves of size {}",
                self.min_leaf
            )));
        }
        Ok(())
    }

    /// `s = ⌈fraction · n⌉`.
    pub fn subsample_size(&self, n: usize) -> usize {
        ((self.subsample_fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
    }

    pub fn constraints(&self) -> SplitConstraints {
        SplitConstraints {
            min_leaf: self.min_leaf,
            balance_alpha: self.balance_alpha,
        }
    }
}

/// Size limits on the two children of a split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConstraints {
    pub min_leaf: usize,
    pub balance_alpha: f64,
}

impl SplitConstraints {
    /// Smallest admissible child of a cell with `m` points: at least `k`,
    /// at least `⌈α m⌉`, at least one.
    pub fn min_child(&self, m: usize) -> usize {
        let balanced = (self.balance_alpha * m as f64 - 1e-9).ceil() as usize;
        self.min_leaf.max(balanced).max(1)
    }

    pub fn admits(&self, m: usize, left: usize) -> bool {
        let lo = self.min_child(m);
        left >= lo && m - left >= lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_names_round_trip() {
        for rule in SplitRule::ALL {
            assert_eq!(rule.as_str().parse::<SplitRule>().unwrap(), rule);
        }
        assert!("bogus".parse::<SplitRule>().is_err());
    }

    #[test]
    fn min_child_uses_ceiling() {
        let c = SplitConstraints {
            min_leaf: 1,
            balance_alpha: 0.1,
        };
        assert_eq!(c.min_child(30), 3);
        assert_eq!(c.min_child(31), 4);
        assert_eq!(c.min_child(5), 1);
        let c = SplitConstraints {
            min_leaf: 5,
            balance_alpha: 0.05,
        };
        assert_eq!(c.min_child(400), 20);
        assert_eq!(c.min_child(12), 5);
    }

    #[test]
    fn subsample_size() {
        let c = ForestConfig::default();
        assert_eq!(c.subsample_size(100), 50);
        assert_eq!(c.subsample_size(101), 51);
        let full = ForestConfig {
            subsample_fraction: 1.0,
            ..c
        };
        assert_eq!(full.subsample_size(7), 7);
    }

    #[test]
    fn validation() {
        let c = ForestConfig::default();
        assert!(c.validate(10, 2).is_ok());
        assert!(c.validate(9, 2).is_err());
        assert!(ForestConfig { mtry: Some(3), ..c.clone() }.validate(10, 2).is_err());
        assert!(ForestConfig { balance_alpha: 0.6, ..c.clone() }.validate(10, 2).is_err());
        assert!(ForestConfig { subsample_fraction: 0.0, ..c }.validate(10, 2).is_err());
    }
}
