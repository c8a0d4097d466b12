use serde::{Deserialize, Serialize};

/// Multinomial logistic regression trained by full-batch gradient descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReg {
    /// `weights[c]` has one entry per input dimension.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogReg {
    /// Minimizes mean cross-entropy plus `lambda/2 · ||W||²` (bias not
    /// penalized) from zero-initialized weights.
    pub fn fit(
        rows: &[Vec<f64>],
        classes: &[usize],
        num_classes: usize,
        lambda: f64,
        learning_rate: f64,
        iterations: usize,
    ) -> Self {
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut weights = vec![vec![0.0; dim]; num_classes];
        let mut bias = vec![0.0; num_classes];
        let mut grad_w = vec![vec![0.0; dim]; num_classes];
        let mut grad_b = vec![0.0; num_classes];
        let mut probs = vec![0.0; num_classes];

        for _ in 0..iterations {
            grad_w.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            grad_b.iter_mut().for_each(|v| *v = 0.0);
            for (x, &y) in rows.iter().zip(classes) {
                softmax_into(&weights, &bias, x, &mut probs);
                for c in 0..num_classes {
                    let err = probs[c] - if c == y { 1.0 } else { 0.0 };
                    grad_b[c] += err;
                    for (g, xi) in grad_w[c].iter_mut().zip(x) {
                        *g += err * xi;
                    }
                }
            }
            for c in 0..num_classes {
                bias[c] -= learning_rate * grad_b[c] / n;
                for (w, g) in weights[c].iter_mut().zip(&grad_w[c]) {
                    *w -= learning_rate * (g / n + lambda * *w);
                }
            }
        }
        Self { weights, bias }
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.bias.len()];
        softmax_into(&self.weights, &self.bias, x, &mut p);
        p
    }
}

fn softmax_into(weights: &[Vec<f64>], bias: &[f64], x: &[f64], out: &mut [f64]) {
    for ((o, w), b) in out.iter_mut().zip(weights).zip(bias) {
        *o = b + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}
