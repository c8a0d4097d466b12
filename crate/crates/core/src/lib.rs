//! Identification of dairy cows from near-infrared udder images.
//!
//! The pipeline has three stages:
//!
//! 1. **Preprocess** ([`imaging`]): load a frame, rotate it so the cow faces
//!    left and crop to the udder.
//! 2. **Describe** ([`texture`], [`geometry`]): rotation-invariant LBP
//!    histograms at radii 1 and 2 (72 values) and a 17-value teat-geometry
//!    descriptor computed from a four-teat annotation.
//! 3. **Identify** ([`classifiers`], [`evaluation`]): KNN, logistic
//!    regression, linear SVM, CART and random forest over an enrolled
//!    gallery, evaluated with randomized rank-1 accuracy curves.
//!
//! [`synthetic`] generates seeded herds with known ground truth and
//! [`dataset_io`] reads and writes the manifest, annotation and CSV files.

pub mod classifiers;
pub mod dataset_io;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod imaging;
pub mod seed;
pub mod synthetic;
pub mod texture;

pub use classifiers::{
    fit, Algorithm, CowId, FeatureLayout, FeatureVector, Hyperparams, TrainedModel,
};
pub use error::{Error, Result};
pub use evaluation::{
    accuracy_curve, export_report, import_report, run_trial, split_protocol, CurveConfig, Dataset,
    EvaluationReport, ReportEntry, Sample, Split, SplitMode,
};
pub use geometry::{
    check_convex_order, edge_distances, geometric_features, interior_angles, teat_centers, BoxRect,
    Convexity, GeometricFeatures, Point, TeatBox, TeatPosition, UdderAnnotation,
};
pub use imaging::{load_grayscale, rotate_crop, CropRect, GrayImage};
pub use texture::{
    build_necklace_table, lbp_code, lbp_histogram, texture_features, NecklaceTable,
    TextureFeatures,
};
