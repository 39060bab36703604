//! Random forest regression: variance-reduction trees on bootstrap samples
//! with per-split feature subsampling.

use fncap_core::num::{real_usize, Real};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetOf, Normalization};
use crate::error::ModelError;
use crate::model::{Family, ModelParams, TrainedModelOf};

/// Forest hyperparameters. Defaults follow common practice since the
/// training protocol leaves them open; all are grid-searchable.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
    /// Nodes with fewer rows than this become leaves.
    pub min_split: usize,
    /// Features considered per split; `None` means `ceil(p / 3)`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { trees: 100, max_depth: 12, min_split: 4, features_per_split: None, bootstrap: true }
    }
}

pub const MIN_FOREST_ROWS: usize = 10;

/// One regression tree as a node arena; index 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<R> {
    pub nodes: Vec<TreeNode<R>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<R> {
    Leaf { value: R },
    Split { feature: usize, threshold: R, left: u32, right: u32 },
}

impl<R: Real> Tree<R> {
    pub fn predict(&self, z: &[R]) -> R {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if z[*feature] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }
}

pub fn fit_random_forest<R: Real>(
    train: &DatasetOf<R>,
    config: &ForestConfig,
    seed: u64,
) -> Result<TrainedModelOf<R>, ModelError> {
    if train.len() < MIN_FOREST_ROWS {
        return Err(ModelError::TooFewSamples { needed: MIN_FOREST_ROWS, got: train.len() });
    }
    let norm = Normalization::fit(train);
    let z = norm.apply(train);
    let features_per_split =
        config.features_per_split.unwrap_or_else(|| train.width().div_ceil(3)).max(1);

    let trees: Vec<Tree<R>> = (0..config.trees)
        .map(|t| {
            // splitmix-style stream separation so trees are independent but
            // reproducible from (seed, tree index).
            let stream = seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let rows: Vec<usize> = if config.bootstrap {
                (0..z.len()).map(|_| rng.random_range(0..z.len())).collect()
            } else {
                (0..z.len()).collect()
            };
            let mut builder = TreeBuilder {
                data: &z,
                rng,
                max_depth: config.max_depth,
                min_split: config.min_split.max(2),
                features_per_split,
                nodes: Vec::new(),
            };
            builder.build(rows, 0);
            Tree { nodes: builder.nodes }
        })
        .collect();

    Ok(TrainedModelOf {
        family: Family::Forest,
        params: ModelParams::Forest { config: config.clone(), trees },
        norm,
        fold_scores: Vec::new(),
        test_r2: None,
        seed,
    })
}

struct TreeBuilder<'a, R> {
    data: &'a DatasetOf<R>,
    rng: ChaCha8Rng,
    max_depth: usize,
    min_split: usize,
    features_per_split: usize,
    nodes: Vec<TreeNode<R>>,
}

impl<R: Real> TreeBuilder<'_, R> {
    /// Append the subtree for `rows` and return its node index.
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> u32 {
        let mean = self.mean_of(&rows);
        if depth >= self.max_depth || rows.len() < self.min_split || self.is_pure(&rows) {
            return self.push(TreeNode::Leaf { value: mean });
        }
        let Some((feature, threshold)) = self.best_split(&rows) else {
            return self.push(TreeNode::Leaf { value: mean });
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| self.data.x[i][feature] <= threshold);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let at = self.push(TreeNode::Split { feature, threshold, left: 0, right: 0 });
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        if let TreeNode::Split { left: l, right: r, .. } = &mut self.nodes[at as usize] {
            *l = left;
            *r = right;
        }
        at
    }

    fn push(&mut self, node: TreeNode<R>) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    fn mean_of(&self, rows: &[usize]) -> R {
        let sum = rows.iter().fold(R::zero(), |acc, &i| acc + self.data.y[i]);
        sum / real_usize(rows.len().max(1))
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        let first = self.data.y[rows[0]];
        rows.iter().all(|&i| self.data.y[i] == first)
    }

    /// Best (feature, threshold) by summed squared error over a random
    /// feature subset. `None` when no candidate separates the rows.
    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, R)> {
        let mut features: Vec<usize> = (0..self.data.width()).collect();
        features.shuffle(&mut self.rng);
        features.truncate(self.features_per_split);

        let mut best: Option<(R, usize, R)> = None;
        for &feature in &features {
            let mut sorted: Vec<usize> = rows.to_vec();
            sorted.sort_by(|&a, &b| {
                self.data.x[a][feature]
                    .partial_cmp(&self.data.x[b][feature])
                    .expect("finite features")
            });

            // Prefix sums let every cut point be scored in O(1).
            let mut sum_left = R::zero();
            let mut sq_left = R::zero();
            let (mut sum_right, mut sq_right) = sorted.iter().fold(
                (R::zero(), R::zero()),
                |(s, q), &i| {
                    let y = self.data.y[i];
                    (s + y, q + y * y)
                },
            );

            for cut in 1..sorted.len() {
                let y = self.data.y[sorted[cut - 1]];
                sum_left += y;
                sq_left += y * y;
                sum_right -= y;
                sq_right -= y * y;

                let (prev, here) =
                    (self.data.x[sorted[cut - 1]][feature], self.data.x[sorted[cut]][feature]);
                if prev == here {
                    continue;
                }
                let n_left = real_usize::<R>(cut);
                let n_right = real_usize::<R>(sorted.len() - cut);
                let sse =
                    (sq_left - sum_left * sum_left / n_left)
                        + (sq_right - sum_right * sum_right / n_right);
                if best.as_ref().is_none_or(|(b, _, _)| sse < *b) {
                    let two = R::one() + R::one();
                    best = Some((sse, feature, (prev + here) / two));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }
}
