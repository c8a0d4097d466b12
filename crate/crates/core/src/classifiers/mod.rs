//! Identification classifiers over an enrolled gallery.
//!
//! All five algorithms share one pipeline: the gallery is put into a
//! canonical order (cow id, then feature values), a standardizer is fitted
//! on it, and the algorithm trains on the standardized vectors. Ranking
//! returns every enrolled cow id, best first, with score ties resolved by
//! lexicographic cow id.

mod forest;
mod knn;
mod logreg;
mod standardize;
mod svm;
mod tree;

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use forest::RandomForest;
pub use knn::Knn;
pub use logreg::LogReg;
pub use standardize::Standardizer;
pub use svm::LinearSvm;
pub use tree::{DecisionTree, Node};

pub type CowId = String;

/// Current model document version.
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureLayout {
    #[serde(rename = "geometry-17")]
    Geometry17,
    #[serde(rename = "texture-72")]
    Texture72,
    #[serde(rename = "combined-89")]
    Combined89,
}

impl FeatureLayout {
    pub const ALL: [FeatureLayout; 3] = [
        FeatureLayout::Geometry17,
        FeatureLayout::Texture72,
        FeatureLayout::Combined89,
    ];

    pub fn dim(self) -> usize {
        match self {
            FeatureLayout::Geometry17 => 17,
            FeatureLayout::Texture72 => 72,
            FeatureLayout::Combined89 => 89,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureLayout::Geometry17 => "geometry-17",
            FeatureLayout::Texture72 => "texture-72",
            FeatureLayout::Combined89 => "combined-89",
        }
    }

    pub fn needs_geometry(self) -> bool {
        self != FeatureLayout::Texture72
    }

    pub fn needs_texture(self) -> bool {
        self != FeatureLayout::Geometry17
    }

    pub fn from_dim(dim: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.dim() == dim)
    }
}

impl fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometry-17" | "geometry" => Ok(FeatureLayout::Geometry17),
            "texture-72" | "texture" => Ok(FeatureLayout::Texture72),
            "combined-89" | "combined" => Ok(FeatureLayout::Combined89),
            other => Err(Error::UnknownLayout(other.to_string())),
        }
    }
}

/// A validated feature vector tagged with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    layout: FeatureLayout,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(layout: FeatureLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::LengthMismatch {
                layout: layout.to_string(),
                len: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature(i));
        }
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Knn,
    Logreg,
    Svm,
    Tree,
    Forest,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Knn,
        Algorithm::Logreg,
        Algorithm::Svm,
        Algorithm::Tree,
        Algorithm::Forest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::Logreg => "logreg",
            Algorithm::Svm => "svm",
            Algorithm::Tree => "tree",
            Algorithm::Forest => "forest",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(Algorithm::Knn),
            "logreg" | "lr" => Ok(Algorithm::Logreg),
            "svm" => Ok(Algorithm::Svm),
            "tree" | "dt" => Ok(Algorithm::Tree),
            "forest" | "rf" => Ok(Algorithm::Forest),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Training knobs. Defaults are the documented fixed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub standardize: bool,
    pub knn_k: usize,
    pub logreg_lambda: f64,
    pub logreg_learning_rate: f64,
    pub logreg_iterations: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub forest_trees: usize,
    /// Features tried per split; `None` means ⌊√d⌋.
    pub forest_max_features: Option<usize>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            standardize: true,
            knn_k: 1,
            logreg_lambda: 1e-3,
            logreg_learning_rate: 0.5,
            logreg_iterations: 2000,
            svm_lambda: 1e-3,
            svm_epochs: 2000,
            forest_trees: 100,
            forest_max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelParams {
    Knn(Knn),
    Logreg(LogReg),
    Svm(LinearSvm),
    Tree(DecisionTree),
    Forest(RandomForest),
}

/// A fitted classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    version: u32,
    algorithm: Algorithm,
    layout: FeatureLayout,
    /// Enrolled cow ids, sorted; class index `i` is `labels[i]`.
    labels: Vec<CowId>,
    standardizer: Standardizer,
    params: ModelParams,
}

/// Fit `algorithm` on `(vector, cow id)` pairs.
pub fn fit(
    algorithm: Algorithm,
    gallery: &[(FeatureVector, CowId)],
    hyper: &Hyperparams,
    seed: u64,
) -> Result<TrainedModel> {
    let (first, _) = gallery.first().ok_or(Error::EmptyGallery)?;
    let layout = first.layout;
    for (v, _) in gallery {
        if v.layout != layout {
            return Err(Error::InconsistentLayout {
                expected: layout.to_string(),
                found: v.layout.to_string(),
            });
        }
        if let Some(i) = v.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteFeature(i));
        }
    }

    // canonical order makes training independent of input order
    let mut order: Vec<usize> = (0..gallery.len()).collect();
    order.sort_by(|&a, &b| {
        gallery[a]
            .1
            .cmp(&gallery[b].1)
            .then_with(|| cmp_values(&gallery[a].0.values, &gallery[b].0.values))
            .then(a.cmp(&b))
    });

    let mut labels: Vec<CowId> = gallery.iter().map(|(_, id)| id.clone()).collect();
    labels.sort();
    labels.dedup();
    let classes: Vec<usize> = order
        .iter()
        .map(|&i| labels.binary_search(&gallery[i].1).expect("label collected"))
        .collect();
    let raw: Vec<Vec<f64>> = order.iter().map(|&i| gallery[i].0.values.clone()).collect();
    let standardizer = if hyper.standardize {
        Standardizer::fit(&raw)
    } else {
        Standardizer::identity(layout.dim())
    };
    let rows: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.apply(r)).collect();
    let k = labels.len();

    let params = match algorithm {
        Algorithm::Knn => ModelParams::Knn(Knn::fit(hyper.knn_k, &rows, &classes)),
        Algorithm::Logreg => ModelParams::Logreg(LogReg::fit(
            &rows,
            &classes,
            k,
            hyper.logreg_lambda,
            hyper.logreg_learning_rate,
            hyper.logreg_iterations,
        )),
        Algorithm::Svm => ModelParams::Svm(LinearSvm::fit(
            &rows,
            &classes,
            k,
            hyper.svm_lambda,
            hyper.svm_epochs,
            seed,
        )),
        Algorithm::Tree => ModelParams::Tree(DecisionTree::fit(&rows, &classes, k)),
        Algorithm::Forest => ModelParams::Forest(RandomForest::fit(
            &rows,
            &classes,
            k,
            hyper.forest_trees,
            hyper.forest_max_features,
            seed,
        )),
    };

    Ok(TrainedModel {
        version: MODEL_VERSION,
        algorithm,
        layout,
        labels,
        standardizer,
        params,
    })
}

fn cmp_values(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    pub fn labels(&self) -> &[CowId] {
        &self.labels
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Every enrolled cow id, best first.
    pub fn rank(&self, probe: &FeatureVector) -> Result<Vec<CowId>> {
        Ok(self
            .rank_with_scores(probe)?
            .into_iter()
            .map(|(id, _)| id)
            .collect())
    }

    /// Ranking paired with the primary score of each cow.
    pub fn rank_with_scores(&self, probe: &FeatureVector) -> Result<Vec<(CowId, f64)>> {
        if probe.layout != self.layout {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                found: probe.layout.to_string(),
            });
        }
        let x = self.standardizer.apply(&probe.values);
        let k = self.labels.len();
        // (primary, secondary) scores, higher is better
        let scores: Vec<(f64, f64)> = match &self.params {
            ModelParams::Knn(m) => m.scores(&x, k),
            ModelParams::Logreg(m) => m.probabilities(&x).into_iter().map(|p| (p, 0.0)).collect(),
            ModelParams::Svm(m) => m.margins(&x).into_iter().map(|s| (s, 0.0)).collect(),
            ModelParams::Tree(m) => {
                let counts = m.leaf_counts(&x);
                let total: u32 = counts.iter().map(|&(_, n)| n).sum();
                let mut s = vec![(0.0, 0.0); k];
                for &(c, n) in counts {
                    s[c].0 = n as f64 / total as f64;
                }
                s
            }
            ModelParams::Forest(m) => m.votes(&x, k).into_iter().map(|v| (v, 0.0)).collect(),
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .0
                .total_cmp(&scores[a].0)
                .then(scores[b].1.total_cmp(&scores[a].1))
                .then(a.cmp(&b))
        });
        Ok(order
            .into_iter()
            .map(|i| (self.labels[i].clone(), scores[i].0))
            .collect())
    }

    pub fn predict(&self, probe: &FeatureVector) -> Result<CowId> {
        Ok(self
            .rank(probe)?
            .into_iter()
            .next()
            .expect("a fitted model has at least one label"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "model".into(),
            reason: e.to_string(),
        })?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelVersion(model.version));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
