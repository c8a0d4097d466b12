use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const IMPURITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        dim: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// `(class, count)` pairs, class ascending, zero counts omitted.
        counts: Vec<(usize, u32)>,
    },
}

/// CART classification tree with Gini impurity, grown until every leaf is
/// pure or cannot be split further. Samples with `x[dim] <= threshold` go
/// left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

/// Per-split feature sampling, used by the forest.
pub(crate) struct FeatureSampler<'a> {
    pub max_features: usize,
    pub rng: &'a mut ChaCha8Rng,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dim: usize,
    threshold: f64,
    impurity: f64,
}

impl DecisionTree {
    pub fn fit(rows: &[Vec<f64>], classes: &[usize], num_classes: usize) -> Self {
        let indices: Vec<usize> = (0..rows.len()).collect();
        Self::fit_indices(rows, classes, num_classes, indices, None)
    }

    pub(crate) fn fit_indices(
        rows: &[Vec<f64>],
        classes: &[usize],
        num_classes: usize,
        indices: Vec<usize>,
        mut sampler: Option<FeatureSampler<'_>>,
    ) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(rows, classes, num_classes, indices, &mut sampler);
        tree
    }

    fn grow(
        &mut self,
        rows: &[Vec<f64>],
        classes: &[usize],
        num_classes: usize,
        indices: Vec<usize>,
        sampler: &mut Option<FeatureSampler<'_>>,
    ) -> usize {
        let id = self.nodes.len();
        let mut counts = vec![0u32; num_classes];
        for &i in &indices {
            counts[classes[i]] += 1;
        }
        let leaf = || Node::Leaf {
            counts: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (k, c))
                .collect(),
        };
        self.nodes.push(leaf());
        if counts.iter().filter(|&&c| c > 0).count() <= 1 {
            return id;
        }
        let Some(best) = best_split(rows, classes, num_classes, &indices, sampler) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| rows[i][best.dim] <= best.threshold);
        let left = self.grow(rows, classes, num_classes, left_idx, sampler);
        let right = self.grow(rows, classes, num_classes, right_idx, sampler);
        self.nodes[id] = Node::Split {
            dim: best.dim,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Class counts at the leaf reached by `x`.
    pub fn leaf_counts(&self, x: &[f64]) -> &[(usize, u32)] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    dim,
                    threshold,
                    left,
                    right,
                } => node = if x[*dim] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority class at the leaf, lowest class index on ties.
    pub fn predict_class(&self, x: &[f64]) -> usize {
        let mut best = (0usize, 0u32);
        for &(c, n) in self.leaf_counts(x) {
            if n > best.1 {
                best = (c, n);
            }
        }
        best.0
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

fn best_split(
    rows: &[Vec<f64>],
    classes: &[usize],
    num_classes: usize,
    indices: &[usize],
    sampler: &mut Option<FeatureSampler<'_>>,
) -> Option<Candidate> {
    let dim = rows[indices[0]].len();
    let scan = |dims: &mut Vec<usize>| {
        dims.sort_unstable();
        let mut best: Option<Candidate> = None;
        for &d in dims.iter() {
            if let Some(c) = best_split_on(rows, classes, num_classes, indices, d) {
                if best.is_none_or(|b| c.impurity < b.impurity - IMPURITY_EPS) {
                    best = Some(c);
                }
            }
        }
        best
    };
    match sampler {
        None => scan(&mut (0..dim).collect()),
        Some(s) => {
            let mut order: Vec<usize> = (0..dim).collect();
            order.shuffle(s.rng);
            let m = s.max_features.clamp(1, dim);
            let found = scan(&mut order[..m].to_vec());
            if found.is_some() {
                return found;
            }
            // keep drawing features until one can split
            for &d in &order[m..] {
                if let Some(c) = best_split_on(rows, classes, num_classes, indices, d) {
                    return Some(c);
                }
            }
            None
        }
    }
}

/// Lowest weighted Gini split on one dimension, lowest threshold on ties.
fn best_split_on(
    rows: &[Vec<f64>],
    classes: &[usize],
    num_classes: usize,
    indices: &[usize],
    dim: usize,
) -> Option<Candidate> {
    let mut sorted: Vec<(f64, usize)> = indices.iter().map(|&i| (rows[i][dim], classes[i])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let mut right = vec![0u32; num_classes];
    for &(_, c) in &sorted {
        right[c] += 1;
    }
    let mut left = vec![0u32; num_classes];
    let mut best: Option<Candidate> = None;
    for i in 0..n - 1 {
        let c = sorted[i].1;
        left[c] += 1;
        right[c] -= 1;
        let (a, b) = (sorted[i].0, sorted[i + 1].0);
        if a >= b {
            continue;
        }
        let impurity = weighted_gini(&left, i + 1) + weighted_gini(&right, n - i - 1);
        if best.is_none_or(|bst| impurity < bst.impurity - IMPURITY_EPS) {
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            best = Some(Candidate {
                dim,
                threshold,
                impurity,
            });
        }
    }
    best
}

/// `n · gini` for a child with class `counts` summing to `n`.
fn weighted_gini(counts: &[u32], n: usize) -> f64 {
    let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    n as f64 - sq / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_lowest_dim_when_tied() {
        // both dims separate the classes perfectly
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let t = DecisionTree::fit(&rows, &[0, 1], 2);
        match &t.nodes[0] {
            Node::Split { dim, threshold, .. } => {
                assert_eq!(*dim, 0);
                assert_eq!(*threshold, 0.5);
            }
            n => panic!("expected split, got {n:?}"),
        }
        assert_eq!(t.predict_class(&[0.2, 0.9]), 0);
        assert_eq!(t.predict_class(&[0.7, 0.0]), 1);
    }

    #[test]
    fn identical_vectors_make_mixed_leaf() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0]];
        let t = DecisionTree::fit(&rows, &[0, 1, 1], 2);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.leaf_counts(&[1.0]), &[(0, 1), (1, 2)]);
        assert_eq!(t.predict_class(&[5.0]), 1);
    }

    #[test]
    fn pure_growth_memorizes_distinct_points() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![((i * 7) % 11) as f64, ((i * 5) % 13) as f64, i as f64 * 0.1])
            .collect();
        let classes: Vec<usize> = (0..30).map(|i| (i * 3) % 7).collect();
        let t = DecisionTree::fit(&rows, &classes, 7);
        for (r, &c) in rows.iter().zip(&classes) {
            assert_eq!(t.predict_class(r), c);
        }
        assert!(t.depth() >= 3);
    }

    #[test]
    fn gini_weights() {
        assert_eq!(weighted_gini(&[2, 0], 2), 0.0);
        assert_eq!(weighted_gini(&[1, 1], 2), 1.0);
    }
}
