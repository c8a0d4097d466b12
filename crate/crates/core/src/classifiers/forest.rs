use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, FeatureSampler};
use crate::seed;

/// Bagged CART trees with √d features tried per split and majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(
        rows: &[Vec<f64>],
        classes: &[usize],
        num_classes: usize,
        num_trees: usize,
        max_features: Option<usize>,
        seed_value: u64,
    ) -> Self {
        let n = rows.len();
        let dim = rows[0].len();
        let max_features = max_features.unwrap_or_else(|| ((dim as f64).sqrt().floor() as usize).max(1));
        let trees = (0..num_trees)
            .map(|t| {
                let mut rng = seed::rng(seed::derive(seed_value, &[t as u64]));
                let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                DecisionTree::fit_indices(
                    rows,
                    classes,
                    num_classes,
                    bootstrap,
                    Some(FeatureSampler {
                        max_features,
                        rng: &mut rng,
                    }),
                )
            })
            .collect();
        Self { trees }
    }

    pub fn votes(&self, x: &[f64], num_classes: usize) -> Vec<f64> {
        let mut votes = vec![0.0; num_classes];
        for tree in &self.trees {
            votes[tree.predict_class(x)] += 1.0;
        }
        votes
    }
}
