use serde::{Deserialize, Serialize};

/// Stored standardized gallery for nearest-neighbor ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub samples: Vec<Vec<f64>>,
    pub classes: Vec<usize>,
}

impl Knn {
    pub fn fit(k: usize, rows: &[Vec<f64>], classes: &[usize]) -> Self {
        Self {
            k: k.max(1),
            samples: rows.to_vec(),
            classes: classes.to_vec(),
        }
    }

    /// Per-class scores. The integer part counts votes among the `k`
    /// nearest samples; within equal votes, the nearer class wins.
    ///
    /// Returned as `(votes, -nearest distance)` so the caller can sort
    /// lexicographically.
    pub fn scores(&self, probe: &[f64], num_classes: usize) -> Vec<(f64, f64)> {
        let mut dists: Vec<(f64, usize)> = self
            .samples
            .iter()
            .zip(&self.classes)
            .map(|(s, &c)| (sq_dist(s, probe), c))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut nearest = vec![f64::INFINITY; num_classes];
        for &(d, c) in &dists {
            if d < nearest[c] {
                nearest[c] = d;
            }
        }
        let mut votes = vec![0.0; num_classes];
        for &(_, c) in dists.iter().take(self.k) {
            votes[c] += 1.0;
        }
        votes
            .into_iter()
            .zip(nearest)
            .map(|(v, d)| (v, -d.sqrt()))
            .collect()
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
