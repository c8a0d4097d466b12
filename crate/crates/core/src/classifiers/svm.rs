use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed;

/// Linear one-vs-rest SVM trained with the Pegasos stochastic subgradient
/// method. The bias is learned as the weight of a constant feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearSvm {
    pub fn fit(
        rows: &[Vec<f64>],
        classes: &[usize],
        num_classes: usize,
        lambda: f64,
        epochs: usize,
        seed_value: u64,
    ) -> Self {
        let dim = rows[0].len();
        // augmented weights: last entry is the bias
        let mut w = vec![vec![0.0; dim + 1]; num_classes];
        let radius = 1.0 / lambda.sqrt();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut rng = seed::rng(seed_value);
        let mut t = 0u64;

        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let x = &rows[i];
                for (c, wc) in w.iter_mut().enumerate() {
                    let y = if classes[i] == c { 1.0 } else { -1.0 };
                    let margin = y * (dot(&wc[..dim], x) + wc[dim]);
                    let shrink = 1.0 - eta * lambda;
                    wc.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        for (v, xi) in wc[..dim].iter_mut().zip(x) {
                            *v += eta * y * xi;
                        }
                        wc[dim] += eta * y;
                    }
                    let norm = wc.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > radius {
                        let s = radius / norm;
                        wc.iter_mut().for_each(|v| *v *= s);
                    }
                }
            }
        }

        let bias = w.iter().map(|wc| wc[dim]).collect();
        let weights = w
            .into_iter()
            .map(|mut wc| {
                wc.truncate(dim);
                wc
            })
            .collect();
        Self { weights, bias }
    }

    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
