//! CART classification tree with Gini splits, grown on bootstrap samples
//! inside the forest.

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        prediction: u8,
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Node-fraction-weighted impurity decrease of this split.
        importance: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: Node,
    pub n_features: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features considered per split (sqrt(m) in the forest).
    pub mtry: usize,
}

/// Gini impurity of a two-class count pair.
pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [u8],
    config: TreeConfig,
    n_total: f64,
}

impl DecisionTree {
    pub fn fit(
        rows: &[Vec<f64>],
        labels: &[u8],
        sample: &[usize],
        config: TreeConfig,
        rng: &mut impl Rng,
    ) -> Self {
        let n_features = rows.first().map_or(0, Vec::len);
        let grower = Grower {
            rows,
            labels,
            config,
            n_total: sample.len() as f64,
        };
        let mut indices = sample.to_vec();
        let root = grower.grow(&mut indices, 0, rng);
        DecisionTree { root, n_features }
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { prediction, .. } => return *prediction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Sum of split importances per feature across the whole tree.
    pub fn feature_importances(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_features];
        fn walk(node: &Node, acc: &mut [f64]) {
            if let Node::Split {
                feature,
                importance,
                left,
                right,
                ..
            } = node
            {
                acc[*feature] += *importance;
                walk(left, acc);
                walk(right, acc);
            }
        }
        walk(&self.root, &mut acc);
        acc
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl Grower<'_> {
    fn grow(&self, indices: &mut [usize], depth: usize, rng: &mut impl Rng) -> Node {
        let counts = self.count(indices);
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
        let too_small = indices.len() < 2 * self.config.min_leaf;
        if pure || depth_capped || too_small {
            return self.leaf(counts);
        }
        let Some(split) = self.best_split(indices, rng) else {
            return self.leaf(counts);
        };
        let mid = partition(self.rows, indices, split.feature, split.threshold);
        let (left_idx, right_idx) = indices.split_at_mut(mid);
        let left = self.grow(left_idx, depth + 1, rng);
        let right = self.grow(right_idx, depth + 1, rng);
        Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            importance: split.decrease,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn leaf(&self, counts: [usize; 2]) -> Node {
        Node::Leaf {
            prediction: (counts[1] > counts[0]) as u8,
            counts,
        }
    }

    fn count(&self, indices: &[usize]) -> [usize; 2] {
        let mut c = [0usize; 2];
        for &i in indices {
            c[self.labels[i] as usize] += 1;
        }
        c
    }

    /// Best Gini split over an mtry-subset of features; candidate
    /// thresholds are midpoints between distinct consecutive sorted values.
    /// Ties break toward the lower feature index, then lower threshold.
    fn best_split(&self, indices: &[usize], rng: &mut impl Rng) -> Option<BestSplit> {
        let m = self.rows[0].len();
        let mut features: Vec<usize> = (0..m).collect();
        features.shuffle(rng);
        features.truncate(self.config.mtry.clamp(1, m));
        features.sort_unstable();

        let parent = self.count(indices);
        let n = indices.len() as f64;
        let parent_term = n / self.n_total * gini(parent);
        let mut best: Option<BestSplit> = None;

        let mut sorted = indices.to_vec();
        for &f in &features {
            sorted.sort_by(|&a, &b| self.rows[a][f].partial_cmp(&self.rows[b][f]).unwrap());
            let mut left = [0usize; 2];
            let mut right = parent;
            for k in 0..sorted.len() - 1 {
                let label = self.labels[sorted[k]] as usize;
                left[label] += 1;
                right[label] -= 1;
                let (va, vb) = (self.rows[sorted[k]][f], self.rows[sorted[k + 1]][f]);
                if va == vb {
                    continue;
                }
                let n_left = k + 1;
                let n_right = sorted.len() - n_left;
                if n_left < self.config.min_leaf || n_right < self.config.min_leaf {
                    continue;
                }
                let decrease = parent_term
                    - n_left as f64 / self.n_total * gini(left)
                    - n_right as f64 / self.n_total * gini(right);
                let threshold = 0.5 * (va + vb);
                let better = match &best {
                    None => decrease > 1e-15,
                    Some(b) => {
                        decrease > b.decrease + 1e-15
                            || ((decrease - b.decrease).abs() <= 1e-15
                                && (f, threshold) < (b.feature, b.threshold))
                    }
                };
                if better {
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        decrease,
                    });
                }
            }
        }
        best
    }
}

/// In-place stable partition of `indices` by the split predicate; returns
/// the boundary position.
fn partition(rows: &[Vec<f64>], indices: &mut [usize], feature: usize, threshold: f64) -> usize {
    let mut ordered: Vec<usize> = Vec::with_capacity(indices.len());
    ordered.extend(
        indices
            .iter()
            .copied()
            .filter(|&i| rows[i][feature] <= threshold),
    );
    let mid = ordered.len();
    ordered.extend(
        indices
            .iter()
            .copied()
            .filter(|&i| rows[i][feature] > threshold),
    );
    indices.copy_from_slice(&ordered);
    mid
}
