//! Random-forest regression: bagged CART trees with per-node random
//! feature subsets, greedy variance-reduction splits, and mean-of-leaves
//! prediction.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Real;

/// Number of candidate features examined per split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitRule {
    /// All features.
    All,
    /// Ceiling of the square root of the feature count.
    Sqrt,
    /// Binary logarithm of the feature count, at least one.
    Log2,
}

impl SplitRule {
    pub fn label(&self) -> &'static str {
        match self {
            SplitRule::All => "all",
            SplitRule::Sqrt => "sqrt",
            SplitRule::Log2 => "log2",
        }
    }

    fn candidates(&self, dim: usize) -> usize {
        match self {
            SplitRule::All => dim,
            SplitRule::Sqrt => (dim as Real).sqrt().ceil() as usize,
            SplitRule::Log2 => ((dim as Real).log2().floor() as usize).max(1),
        }
        .clamp(1, dim)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum TreeNode {
    Leaf {
        value: Real,
    },
    Split {
        feature: usize,
        threshold: Real,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    fn predict(&self, x: &[Real]) -> Real {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

struct Builder<'a> {
    x: &'a [Vec<Real>],
    y: &'a [Real],
    n_candidates: usize,
    nodes: Vec<TreeNode>,
}

impl<'a> Builder<'a> {
    /// Greedy best split over a random feature subset; returns
    /// (feature, threshold, sse) or None when no feature separates the
    /// samples.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, Real, Real)> {
        let dim = self.x[0].len();
        let features = sample(rng, dim, self.n_candidates);
        let mut best: Option<(usize, Real, Real)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            // Prefix sums over the sorted order give each candidate
            // split's children sum-of-squared-error in O(1).
            let total_sum: Real = order.iter().map(|&i| self.y[i]).sum();
            let total_sq: Real = order.iter().map(|&i| self.y[i] * self.y[i]).sum();
            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for (pos, &i) in order.iter().enumerate().take(order.len() - 1) {
                left_sum += self.y[i];
                left_sq += self.y[i] * self.y[i];
                let next = order[pos + 1];
                if self.x[i][f] == self.x[next][f] {
                    continue;
                }
                let nl = (pos + 1) as Real;
                let nr = (order.len() - pos - 1) as Real;
                let sse = (left_sq - left_sum * left_sum / nl)
                    + ((total_sq - left_sq) - (total_sum - left_sum).powi(2) / nr);
                if best.as_ref().map_or(true, |&(_, _, b)| sse < b) {
                    let threshold = 0.5 * (self.x[i][f] + self.x[next][f]);
                    best = Some((f, threshold, sse));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let mean = idx.iter().map(|&i| self.y[i]).sum::<Real>() / idx.len() as Real;
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        if idx.len() < 2 || pure {
            self.nodes.push(TreeNode::Leaf { value: mean });
            return self.nodes.len() - 1;
        }
        let Some((feature, threshold, _)) = self.best_split(idx, rng) else {
            self.nodes.push(TreeNode::Leaf { value: mean });
            return self.nodes.len() - 1;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: mean }); // placeholder
        let left = self.grow(&left_idx, rng);
        let right = self.grow(&right_idx, rng);
        self.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

pub fn fit(
    x: &[Vec<Real>],
    y: &[Real],
    n_tree: usize,
    split_rule: SplitRule,
    seed: u64,
    bootstrap: bool,
) -> ForestModel {
    let n = x.len();
    let dim = x[0].len();
    let n_candidates = split_rule.candidates(dim);
    let trees = (0..n_tree)
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((t as u64).wrapping_mul(0x9E3779B97F4A7C15)));
            let idx: Vec<usize> = if bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut b = Builder {
                x,
                y,
                n_candidates,
                nodes: Vec::new(),
            };
            b.grow(&idx, &mut rng);
            Tree { nodes: b.nodes }
        })
        .collect();
    ForestModel { trees }
}

impl ForestModel {
    pub fn predict(&self, x: &[Real]) -> Real {
        self.trees.iter().map(|t| t.predict(x)).sum::<Real>() / self.trees.len() as Real
    }
}
