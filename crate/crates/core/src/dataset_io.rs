//! Manifest and annotation files, feature extraction over a manifest, and
//! CSV feature export.
//!
//! Manifest (`schema: 1`):
//!
//! ```json
//! { "schema": 1, "collection": 1,
//!   "entries": [ { "cow_id": "cow-001", "day": 1, "image": "img/a.png",
//!                  "rotation_deg": 12.5, "crop": {"x":0,"y":0,"w":400,"h":300},
//!                  "annotation": "ann/a.json" } ] }
//! ```
//!
//! `image` and `crop` may be null (geometry-only data, or a full-frame
//! crop). Relative paths resolve against the manifest's directory.
//!
//! Annotation (`schema: 1`), in preprocessed-image pixels:
//!
//! ```json
//! { "schema": 1, "image": "a.png", "udder_box": {"x":..,"y":..,"w":..,"h":..},
//!   "teats": [ {"position": "LF", "box": {"x":..,"y":..,"w":..,"h":..}}, ... ] }
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::classifiers::{FeatureLayout, FeatureVector};
use crate::error::{Error, Result};
use crate::evaluation::{Dataset, Sample};
use crate::geometry::{geometric_features, BoxRect, TeatBox, UdderAnnotation};
use crate::imaging::{load_grayscale, rotate, rotate_crop, CropRect};
use crate::texture::texture_features;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub cow_id: String,
    pub day: u32,
    #[serde(default)]
    pub image: Option<PathBuf>,
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default)]
    pub crop: Option<CropRect>,
    pub annotation: PathBuf,
}

impl ManifestEntry {
    /// Stable label used in error messages and frame listings.
    pub fn label(&self, collection: u32) -> String {
        format!("collection {collection} cow {} day {}", self.cow_id, self.day)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub collection: u32,
    pub entries: Vec<ManifestEntry>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn new(collection: u32, entries: Vec<ManifestEntry>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            collection,
            entries,
            base_dir: PathBuf::new(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn annotation_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.resolve(&entry.annotation)
    }

    pub fn image_path(&self, entry: &ManifestEntry) -> Option<PathBuf> {
        entry.image.as_deref().map(|p| self.resolve(p))
    }

    fn validate(&self, context: &str) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::SchemaViolation {
                context: context.into(),
                reason: format!("unsupported schema {}", self.schema),
            });
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert((e.cow_id.as_str(), e.day)) {
                return Err(Error::DuplicateEntry(e.label(self.collection)));
            }
            if !e.rotation_deg.is_finite() {
                return Err(Error::SchemaViolation {
                    context: context.into(),
                    reason: format!("{}: rotation_deg must be finite", e.label(self.collection)),
                });
            }
            if let Some(img) = self.image_path(e) {
                if !img.exists() {
                    return Err(Error::FileNotFound(img));
                }
            }
        }
        Ok(())
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    let mut m: Manifest = serde_json::from_str(&text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::SchemaViolation {
            context: context.clone(),
            reason: e.to_string(),
        },
        _ => Error::Parse {
            context: context.clone(),
            reason: e.to_string(),
        },
    })?;
    m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    m.validate(&context)?;
    Ok(m)
}

pub fn save_manifest(m: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    write_atomic(path, (text + "\n").as_bytes())
}

#[derive(Serialize, Deserialize)]
struct AnnotationDoc {
    #[serde(default = "default_schema")]
    schema: u32,
    image: String,
    udder_box: BoxRect,
    teats: Vec<TeatBox>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// Parse and validate an annotation document.
pub fn annotation_from_json(text: &str) -> Result<UdderAnnotation> {
    let doc: AnnotationDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: "annotation".into(),
        reason: e.to_string(),
    })?;
    if doc.schema != SCHEMA_VERSION {
        return Err(Error::Parse {
            context: "annotation".into(),
            reason: format!("unsupported schema {}", doc.schema),
        });
    }
    UdderAnnotation::new(doc.image, doc.udder_box, doc.teats)
}

pub fn annotation_to_json(ann: &UdderAnnotation) -> String {
    let doc = AnnotationDoc {
        schema: SCHEMA_VERSION,
        image: ann.image().to_string(),
        udder_box: ann.udder_box(),
        teats: ann.teats().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("annotation serializes")
}

pub fn load_annotation(path: impl AsRef<Path>) -> Result<UdderAnnotation> {
    let path = path.as_ref();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    annotation_from_json(&text)
}

/// Write an annotation. The file is replaced atomically via a sibling
/// temporary file and rename.
pub fn save_annotation(ann: &UdderAnnotation, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), (annotation_to_json(ann) + "\n").as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_file_name(format!(".{name}.tmp-{}-{n}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Feature vector of one manifest entry.
pub fn extract_entry(
    manifest: &Manifest,
    entry: &ManifestEntry,
    layout: FeatureLayout,
    normalize: bool,
) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(layout.dim());
    if layout.needs_geometry() {
        let ann = load_annotation(manifest.annotation_path(entry))?;
        values.extend(geometric_features(&ann, normalize)?.to_vec());
    }
    if layout.needs_texture() {
        let path = manifest.image_path(entry).ok_or_else(|| {
            Error::InvalidArgument("texture features need an image path in the manifest".into())
        })?;
        let img = load_grayscale(&path)?;
        let pre = match entry.crop {
            Some(rect) => rotate_crop(&img, entry.rotation_deg, rect)?,
            // no crop: keep the whole rotated frame
            None => rotate(&img, entry.rotation_deg)?,
        };
        values.extend(texture_features(&pre)?.to_vec());
    }
    FeatureVector::new(layout, values)
}

/// Extract every entry. On failure, returns one error per failing sample.
pub fn extract_manifest(
    manifest: &Manifest,
    layout: FeatureLayout,
    normalize: bool,
) -> std::result::Result<Vec<Sample>, Vec<Error>> {
    use rayon::prelude::*;
    let results: Vec<Result<Sample>> = manifest
        .entries
        .par_iter()
        .map(|e| {
            extract_entry(manifest, e, layout, normalize)
                .map(|features| Sample {
                    cow_id: e.cow_id.clone(),
                    collection: manifest.collection,
                    day: e.day,
                    features,
                })
                .map_err(|source| Error::Extraction {
                    sample: e.label(manifest.collection),
                    source: Box::new(source),
                })
        })
        .collect();
    let mut ok = Vec::new();
    let mut errs = Vec::new();
    for r in results {
        match r {
            Ok(s) => ok.push(s),
            Err(e) => errs.push(e),
        }
    }
    if errs.is_empty() {
        Ok(ok)
    } else {
        Err(errs)
    }
}

/// Extract several manifests into one dataset.
pub fn extract_dataset(
    manifests: &[Manifest],
    layout: FeatureLayout,
    normalize: bool,
) -> std::result::Result<Dataset, Vec<Error>> {
    let mut samples = Vec::new();
    let mut errs = Vec::new();
    for m in manifests {
        match extract_manifest(m, layout, normalize) {
            Ok(s) => samples.extend(s),
            Err(e) => errs.extend(e),
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    Dataset::new(samples).map_err(|e| vec![e])
}

pub fn features_header(layout: FeatureLayout) -> Vec<String> {
    ["cow_id", "collection", "day"]
        .into_iter()
        .map(String::from)
        .chain((0..layout.dim()).map(|i| format!("f{i}")))
        .collect()
}

pub fn features_to_csv(ds: &Dataset, layout: FeatureLayout) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(features_header(layout))?;
    for s in ds.samples() {
        if s.features.layout() != layout {
            return Err(Error::InconsistentLayout {
                expected: layout.to_string(),
                found: s.features.layout().to_string(),
            });
        }
        let mut rec = vec![s.cow_id.clone(), s.collection.to_string(), s.day.to_string()];
        rec.extend(s.features.values().iter().map(|v| v.to_string()));
        w.write_record(rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Write `cow_id,collection,day,f0..f{d-1}`, one row per sample.
pub fn export_features(ds: &Dataset, layout: FeatureLayout, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = features_to_csv(ds, layout)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn features_from_csv(text: &str) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let schema_err = |reason: String| Error::SchemaViolation {
        context: "features csv".into(),
        reason,
    };
    let dim = header.len().saturating_sub(3);
    let layout =
        FeatureLayout::from_dim(dim).ok_or_else(|| schema_err(format!("{dim} feature columns")))?;
    if header.iter().ne(features_header(layout).iter().map(String::as_str)) {
        return Err(schema_err(format!("unexpected header {header:?}")));
    }
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let bad = |field: &str, v: &str| Error::Parse {
            context: "features csv".into(),
            reason: format!("bad {field} value {v:?}"),
        };
        let values = (3..rec.len())
            .map(|i| rec[i].parse::<f64>().map_err(|_| bad("feature", &rec[i])))
            .collect::<Result<Vec<_>>>()?;
        samples.push(Sample {
            cow_id: rec[0].to_string(),
            collection: rec[1].parse().map_err(|_| bad("collection", &rec[1]))?,
            day: rec[2].parse().map_err(|_| bad("day", &rec[2]))?,
            features: FeatureVector::new(layout, values)?,
        });
    }
    Dataset::new(samples)
}

pub fn import_features(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    features_from_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TeatPosition;

    fn ann() -> UdderAnnotation {
        let b = |x, y| BoxRect::new(x, y, 10.0, 14.0);
        UdderAnnotation::new(
            "frame.png",
            BoxRect::new(0.0, 0.0, 120.0, 90.0),
            vec![
                TeatBox::new(TeatPosition::LF, b(10.0, 10.0)),
                TeatBox::new(TeatPosition::RF, b(10.0, 60.0)),
                TeatBox::new(TeatPosition::RR, b(90.0, 62.5)),
                TeatBox::new(TeatPosition::LR, b(88.0, 9.0)),
            ],
        )
        .unwrap()
    }

    fn entry(cow: &str, day: u32) -> ManifestEntry {
        ManifestEntry {
            cow_id: cow.into(),
            day,
            image: None,
            rotation_deg: 0.0,
            crop: None,
            annotation: format!("{cow}_{day}.json").into(),
        }
    }

    #[test]
    fn annotation_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.json");
        save_annotation(&ann(), &p).unwrap();
        assert_eq!(load_annotation(&p).unwrap(), ann());
    }

    #[test]
    fn annotation_errors() {
        let base: serde_json::Value = serde_json::from_str(&annotation_to_json(&ann())).unwrap();
        let mut three = base.clone();
        three["teats"].as_array_mut().unwrap().pop();
        assert_eq!(annotation_from_json(&three.to_string()).unwrap_err().kind(), "missing-teat");
        let mut bad_pos = base.clone();
        bad_pos["teats"][0]["position"] = "XX".into();
        assert_eq!(annotation_from_json(&bad_pos.to_string()).unwrap_err().kind(), "parse-error");
        let mut dup = base.clone();
        dup["teats"][1]["position"] = "LF".into();
        assert_eq!(annotation_from_json(&dup.to_string()).unwrap_err().kind(), "duplicate-position");
        let mut neg = base.clone();
        neg["udder_box"]["w"] = (-1.0).into();
        assert_eq!(annotation_from_json(&neg.to_string()).unwrap_err().kind(), "non-positive-box");
        let mut no_schema = base;
        no_schema.as_object_mut().unwrap().remove("schema");
        assert_eq!(annotation_from_json(&no_schema.to_string()).unwrap(), ann());
        assert_eq!(annotation_from_json("{").unwrap_err().kind(), "parse-error");
    }

    #[test]
    fn manifest_loading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = Manifest::new(1, vec![entry("a", 1), entry("a", 2)]);
        save_manifest(&m, &p).unwrap();
        let loaded = load_manifest(&p).unwrap();
        assert_eq!(loaded.entries, m.entries);
        assert_eq!(loaded.base_dir, dir.path());

        let dup = Manifest::new(1, vec![entry("a", 1), entry("a", 1)]);
        save_manifest(&dup, &p).unwrap();
        assert_eq!(load_manifest(&p).unwrap_err().kind(), "duplicate-entry");

        std::fs::write(&p, r#"{"schema":1,"collection":1,"entries":[{"cow_id":"a","annotation":"x.json"}]}"#).unwrap();
        let err = load_manifest(&p).unwrap_err();
        assert_eq!(err.kind(), "schema-violation");
        assert!(err.to_string().contains("day"));

        std::fs::write(&p, "{ not json").unwrap();
        assert_eq!(load_manifest(&p).unwrap_err().kind(), "parse-error");

        let mut with_image = Manifest::new(1, vec![entry("a", 1)]);
        with_image.entries[0].image = Some("missing.png".into());
        save_manifest(&with_image, &p).unwrap();
        assert_eq!(load_manifest(&p).unwrap_err().kind(), "file-not-found");
    }

    #[test]
    fn extraction_reports_failing_sample() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new(3, vec![entry("a", 1), entry("a", 2)]);
        m.base_dir = dir.path().to_path_buf();
        save_annotation(&ann(), dir.path().join("a_1.json")).unwrap();
        let errs = extract_manifest(&m, FeatureLayout::Geometry17, false).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].to_string().contains("cow a day 2"));
        save_annotation(&ann(), dir.path().join("a_2.json")).unwrap();
        let samples = extract_manifest(&m, FeatureLayout::Geometry17, false).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].collection, 3);
    }

    #[test]
    fn feature_csv_shape() {
        let empty = Dataset::default();
        let text = features_to_csv(&empty, FeatureLayout::Geometry17).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("cow_id,collection,day,f0,"));
        assert!(text.trim_end().ends_with(",f16"));

        let f = geometric_features(&ann(), false).unwrap().to_vec();
        let ds = Dataset::new(vec![Sample {
            cow_id: "a".into(),
            collection: 1,
            day: 2,
            features: FeatureVector::new(FeatureLayout::Geometry17, f).unwrap(),
        }])
        .unwrap();
        let text = features_to_csv(&ds, FeatureLayout::Geometry17).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert_eq!(row.split(',').count(), 20);
        assert_eq!(features_from_csv(&text).unwrap(), ds);
    }
}
