//! Python bindings: images, annotations, classifiers, synthetic herds and
//! the evaluation harness.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use udderid::dataset_io::{
    annotation_from_json, annotation_to_json, extract_dataset, load_annotation, load_manifest,
    save_annotation,
};
use udderid::synthetic::{generate_records, records_to_dataset, write_records, HerdConfig, NoiseModel};
use udderid::{
    accuracy_curve, CurveConfig, Dataset, FeatureLayout, FeatureVector, Hyperparams, Sample,
    SplitMode,
};

create_exception!(pyudderid, UdderidError, PyException);

fn err(e: udderid::Error) -> PyErr {
    UdderidError::new_err(format!("{}: {e}", e.kind()))
}

fn errs(es: Vec<udderid::Error>) -> PyErr {
    UdderidError::new_err(es.iter().map(|e| format!("{}: {e}", e.kind())).collect::<Vec<_>>().join("\n"))
}

fn parse<T: std::str::FromStr<Err = udderid::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// 8-bit grayscale image.
#[pyclass(module = "pyudderid", from_py_object)]
#[derive(Clone)]
pub struct Image(udderid::GrayImage);

#[pymethods]
impl Image {
    /// Row-major pixels, `width * height` bytes.
    #[new]
    fn new(width: u32, height: u32, pixels: Vec<u8>) -> PyResult<Self> {
        udderid::GrayImage::new(width, height, pixels).map(Image).map_err(err)
    }

    /// Load a PNG or JPEG file as grayscale.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        udderid::load_grayscale(path).map(Image).map_err(err)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn pixels(&self) -> Vec<u8> {
        self.0.pixels().to_vec()
    }

    /// Rotate by `angle_deg` and optionally crop to `(x, y, w, h)`.
    #[pyo3(signature = (angle_deg, crop=None))]
    fn preprocess(&self, angle_deg: f64, crop: Option<(i64, i64, u32, u32)>) -> PyResult<Self> {
        let out = match crop {
            Some((x, y, w, h)) => udderid::rotate_crop(&self.0, angle_deg, udderid::CropRect::new(x, y, w, h)),
            None => udderid::imaging::rotate(&self.0, angle_deg),
        };
        out.map(Image).map_err(err)
    }

    fn lbp_histogram(&self, radius: u32) -> PyResult<Vec<f64>> {
        udderid::lbp_histogram(&self.0, radius).map(|h| h.to_vec()).map_err(err)
    }

    /// Radius-1 then radius-2 histograms, 72 values.
    fn texture_features(&self) -> PyResult<Vec<f64>> {
        udderid::texture_features(&self.0).map(|t| t.to_vec()).map_err(err)
    }

    fn to_png(&self) -> Vec<u8> {
        self.0.to_png()
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        self.0.save_png(path).map_err(err)
    }
}

/// Four teat boxes plus the udder box.
#[pyclass(module = "pyudderid", from_py_object)]
#[derive(Clone)]
pub struct Annotation(udderid::UdderAnnotation);

#[pymethods]
impl Annotation {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        annotation_from_json(text).map(Annotation).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_annotation(path).map(Annotation).map_err(err)
    }

    fn to_json(&self) -> String {
        annotation_to_json(&self.0)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_annotation(&self.0, path).map_err(err)
    }

    /// The 17-value geometry descriptor.
    #[pyo3(signature = (normalize=false))]
    fn geometric_features(&self, normalize: bool) -> PyResult<Vec<f64>> {
        udderid::geometric_features(&self.0, normalize).map(|g| g.to_vec()).map_err(err)
    }

    /// Teat centers in the order LF, RF, RR, LR.
    fn teat_centers(&self) -> Vec<(f64, f64)> {
        udderid::teat_centers(&self.0).iter().map(|p| (p.x, p.y)).collect()
    }
}

fn hyperparams(json: Option<&str>) -> PyResult<Hyperparams> {
    match json {
        None => Ok(Hyperparams::default()),
        Some(t) => serde_json::from_str(t).map_err(|e| UdderidError::new_err(format!("parse-error: {e}"))),
    }
}

/// A fitted classifier.
#[pyclass(module = "pyudderid")]
pub struct Model(udderid::TrainedModel);

#[pymethods]
impl Model {
    /// Fit on `vectors` (each of length 17, 72 or 89) labelled by `labels`.
    #[staticmethod]
    #[pyo3(signature = (algorithm, vectors, labels, seed=42, hyperparams=None))]
    fn fit(
        algorithm: &str,
        vectors: Vec<Vec<f64>>,
        labels: Vec<String>,
        seed: u64,
        hyperparams: Option<&str>,
    ) -> PyResult<Self> {
        if vectors.len() != labels.len() {
            return Err(UdderidError::new_err("invalid-argument: vectors and labels differ in length"));
        }
        let gallery = vectors
            .into_iter()
            .zip(labels)
            .map(|(v, l)| Ok((to_vector(v)?, l)))
            .collect::<PyResult<Vec<_>>>()?;
        let hyper = self::hyperparams(hyperparams)?;
        udderid::fit(parse(algorithm)?, &gallery, &hyper, seed).map(Model).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        udderid::TrainedModel::from_json(text).map(Model).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.0.algorithm().as_str()
    }

    fn predict(&self, vector: Vec<f64>) -> PyResult<String> {
        self.0.predict(&to_vector(vector)?).map_err(err)
    }

    /// Every enrolled cow with its score, best first.
    fn rank(&self, vector: Vec<f64>) -> PyResult<Vec<(String, f64)>> {
        self.0.rank_with_scores(&to_vector(vector)?).map_err(err)
    }
}

fn to_vector(v: Vec<f64>) -> PyResult<FeatureVector> {
    let layout = FeatureLayout::from_dim(v.len())
        .ok_or_else(|| UdderidError::new_err(format!("length-mismatch: no layout has {} values", v.len())))?;
    FeatureVector::new(layout, v).map_err(err)
}

fn samples_to_py<'py>(py: Python<'py>, ds: &Dataset) -> PyResult<Vec<Bound<'py, PyDict>>> {
    ds.samples()
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("cow_id", &s.cow_id)?;
            d.set_item("collection", s.collection)?;
            d.set_item("day", s.day)?;
            d.set_item("features", s.features.values().to_vec())?;
            Ok(d)
        })
        .collect()
}

fn herd(count: usize, seed: u64, noise: (f64, f64, f64, f64), collections: u32, shared: Option<usize>) -> PyResult<HerdConfig> {
    let noise = NoiseModel::new(noise.0, noise.1, noise.2, noise.3).map_err(err)?;
    let mut cfg = HerdConfig::new(count, noise, seed);
    cfg.collections = collections;
    cfg.shared = shared.unwrap_or(count);
    Ok(cfg)
}

/// Geometry samples of a synthetic herd as dicts with `cow_id`,
/// `collection`, `day` and `features`. `noise` is
/// `(center_sigma, box_sigma, scale_sigma, drift)`.
#[pyfunction]
#[pyo3(signature = (count, seed=42, noise=(1.0, 0.02, 0.02, 1.0), collections=1, shared=None, normalize=false))]
fn synthesize<'py>(
    py: Python<'py>,
    count: usize,
    seed: u64,
    noise: (f64, f64, f64, f64),
    collections: u32,
    shared: Option<usize>,
    normalize: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let records = generate_records(&herd(count, seed, noise, collections, shared)?).map_err(err)?;
    let ds = records_to_dataset(&records, normalize).map_err(err)?;
    samples_to_py(py, &ds)
}

/// Write a synthetic herd to `out_dir`; returns the manifest paths.
#[pyfunction]
#[pyo3(signature = (out_dir, count, seed=42, noise=(1.0, 0.02, 0.02, 1.0), collections=1, shared=None, render_size=None))]
fn write_synthetic(
    out_dir: PathBuf,
    count: usize,
    seed: u64,
    noise: (f64, f64, f64, f64),
    collections: u32,
    shared: Option<usize>,
    render_size: Option<u32>,
) -> PyResult<Vec<PathBuf>> {
    let records = generate_records(&herd(count, seed, noise, collections, shared)?).map_err(err)?;
    write_records(&records, &out_dir, render_size.map(|s| (s, s))).map_err(err)
}

/// Extract features from manifest files.
#[pyfunction]
#[pyo3(signature = (manifests, layout="geometry-17", normalize=false))]
fn extract<'py>(py: Python<'py>, manifests: Vec<PathBuf>, layout: &str, normalize: bool) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ms = manifests.iter().map(load_manifest).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let ds = extract_dataset(&ms, parse(layout)?, normalize).map_err(errs)?;
    samples_to_py(py, &ds)
}

/// Rank-1 accuracy curve over `samples` (dicts as returned by
/// `synthesize` or `extract`). Returns one dict per group size.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (samples, algorithm, n_values, trials=50, seed=42, mode="consecutive-day", hyperparams=None))]
fn evaluate<'py>(
    py: Python<'py>,
    samples: Vec<Bound<'py, PyDict>>,
    algorithm: &str,
    n_values: Vec<usize>,
    trials: usize,
    seed: u64,
    mode: &str,
    hyperparams: Option<&str>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let get = |d: &Bound<'py, PyDict>, k: &str| -> PyResult<Bound<'py, PyAny>> {
        d.get_item(k)?.ok_or_else(|| UdderidError::new_err(format!("invalid-argument: sample without `{k}`")))
    };
    let parsed = samples
        .iter()
        .map(|d| {
            Ok(Sample {
                cow_id: get(d, "cow_id")?.extract()?,
                collection: get(d, "collection")?.extract()?,
                day: get(d, "day")?.extract()?,
                features: to_vector(get(d, "features")?.extract()?)?,
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let ds = Dataset::new(parsed).map_err(err)?;
    let cfg = CurveConfig {
        algorithm: parse(algorithm)?,
        mode: parse::<SplitMode>(mode)?,
        n_values,
        trials,
        master_seed: seed,
        hyper: self::hyperparams(hyperparams)?,
    };
    let report = py.detach(|| accuracy_curve(&ds, &cfg)).map_err(err)?;
    report
        .entries
        .iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("algorithm", e.algorithm.as_str())?;
            d.set_item("layout", e.layout.as_str())?;
            d.set_item("n", e.n)?;
            d.set_item("trials", e.trials)?;
            d.set_item("mean_accuracy", e.mean_accuracy)?;
            d.set_item("std_accuracy", e.std_accuracy)?;
            d.set_item("seed", e.seed)?;
            Ok(d)
        })
        .collect()
}

/// Rotation-invariant class (0..36) of an 8-bit LBP code.
#[pyfunction]
fn necklace_class(code: u8) -> usize {
    udderid::NecklaceTable::global().class_of(code)
}

#[pymodule]
fn pyudderid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("UdderidError", m.py().get_type::<UdderidError>())?;
    m.add_class::<Image>()?;
    m.add_class::<Annotation>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(necklace_class, m)?)?;
    Ok(())
}
