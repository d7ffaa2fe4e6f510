use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::Result;
use crate::forest::split::{SplitOutcome, Splitter};
use crate::forest::{Covariates, ForestConfig};
use crate::metric::MetricSpace;

/// Why a node was not split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Fewer than `2k` split-half points.
    TooSmall,
    NoAdmissibleSplit,
    /// All responses in the node coincide; may exceed `2k - 1` points.
    ZeroGain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    /// Estimation-half indices routed here; these carry the forest weights.
    pub estimate: Vec<usize>,
    /// Split-half indices that reached this leaf while growing.
    pub split_members: Vec<usize>,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    subsample: Vec<usize>,
    split_half: Vec<usize>,
    estimate_half: Vec<usize>,
}

impl Tree {
    /// Nodes in preorder; index 0 is the root.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn subsample(&self) -> &[usize] {
        &self.subsample
    }

    pub fn split_half(&self) -> &[usize] {
        &self.split_half
    }

    pub fn estimate_half(&self) -> &[usize] {
        &self.estimate_half
    }

    fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf(_) => return at,
            }
        }
    }

    pub fn leaf_for(&self, x: &[f64]) -> &Leaf {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(leaf) => leaf,
            Node::Split { .. } => unreachable!("routing ends at a leaf"),
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Leaf> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf(l) => Some(l),
            Node::Split { .. } => None,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Split-half members of the subtree rooted at `node`, ascending.
    pub fn members_below(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(at) = stack.pop() {
            match &self.nodes[at] {
                Node::Leaf(l) => out.extend_from_slice(&l.split_members),
                Node::Split { left, right, .. } => stack.extend([*left, *right]),
            }
        }
        out.sort_unstable();
        out
    }
}

struct Grower<'a, 'b, S: MetricSpace, R: Rng> {
    x: &'a Covariates,
    splitter: &'a Splitter<'b, S>,
    config: &'a ForestConfig,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<S: MetricSpace, R: Rng> Grower<'_, '_, S, R> {
    fn features(&mut self) -> Vec<usize> {
        let d = self.x.d();
        match self.config.mtry {
            Some(m) if m < d => {
                let mut f = index::sample(self.rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn leaf(&mut self, at: usize, members: Vec<usize>, stop: StopReason) {
        self.nodes[at] = Node::Leaf(Leaf {
            estimate: Vec::new(),
            split_members: members,
            stop,
        });
    }

    fn grow(&mut self, members: Vec<usize>) -> Result<usize> {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(Leaf {
            estimate: Vec::new(),
            split_members: Vec::new(),
            stop: StopReason::TooSmall,
        }));
        if members.len() < 2 * self.config.min_leaf || members.len() < 2 {
            self.leaf(at, members, StopReason::TooSmall);
            return Ok(at);
        }
        let features = self.features();
        let outcome = self
            .splitter
            .search(&members, self.x, &features, self.config.constraints())?;
        match outcome {
            SplitOutcome::Split(c) => {
                let (l, r): (Vec<usize>, Vec<usize>) = members
                    .iter()
                    .partition(|&&i| self.x.get(i, c.feature) <= c.threshold);
                debug_assert_eq!(l.len(), c.left_count);
                let left = self.grow(l)?;
                let right = self.grow(r)?;
                self.nodes[at] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
            }
            SplitOutcome::NoAdmissibleSplit => self.leaf(at, members, StopReason::NoAdmissibleSplit),
            SplitOutcome::ZeroGain => self.leaf(at, members, StopReason::ZeroGain),
        }
        Ok(at)
    }
}

/// Grows one tree on `data_indices` (the tree's subsample).
///
/// With honesty on, the subsample is shuffled and cut in half: the first
/// `⌈s/2⌉` points choose the splits, the rest are routed down afterwards to
/// populate the leaves. Without honesty both roles use the whole subsample.
pub fn build_tree<S: MetricSpace, R: Rng>(
    data_indices: &[usize],
    x: &Covariates,
    splitter: &Splitter<'_, S>,
    config: &ForestConfig,
    rng: &mut R,
) -> Result<Tree> {
    let mut subsample = data_indices.to_vec();
    subsample.sort_unstable();
    let (mut split_half, mut estimate_half) = if config.honesty {
        let mut shuffled = subsample.clone();
        shuffled.shuffle(rng);
        let cut = shuffled.len().div_ceil(2);
        let rest = shuffled.split_off(cut);
        (shuffled, rest)
    } else {
        (subsample.clone(), subsample.clone())
    };
    split_half.sort_unstable();
    estimate_half.sort_unstable();

    let mut grower = Grower {
        x,
        splitter,
        config,
        rng,
        nodes: Vec::new(),
    };
    grower.grow(split_half.clone())?;
    let mut tree = Tree {
        nodes: grower.nodes,
        subsample,
        split_half,
        estimate_half,
    };
    for &i in &tree.estimate_half {
        let at = tree.leaf_index(x.row(i));
        if let Node::Leaf(leaf) = &mut tree.nodes[at] {
            leaf.estimate.push(i);
        }
    }
    Ok(tree)
}
