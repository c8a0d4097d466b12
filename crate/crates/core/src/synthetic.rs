//! Seeded synthetic herds.
//!
//! Each cow gets a stable template (teat layout, teat box sizes, udder box
//! and a texture seed). Sessions perturb the template with Gaussian center
//! jitter, relative box-size jitter and a global scale factor standing in
//! for camera distance. Sessions in a later collection additionally carry
//! a persistent per-cow deformation whose size grows with the drift
//! factor, standing in for changes over a lactation.
//!
//! All priors and noise levels here are made up for testing; they only
//! need to produce the qualitative behavior checked by the test suites.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classifiers::{FeatureLayout, FeatureVector};
use crate::dataset_io::{save_annotation, save_manifest, Manifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::evaluation::{Dataset, Sample};
use crate::geometry::{
    check_convex_order, geometric_features, BoxRect, Convexity, Point, TeatBox, TeatPosition, UdderAnnotation,
};
use crate::imaging::GrayImage;
use crate::seed;

/// Center displacement (px) per unit of drift above 1.
const DRIFT_CENTER_PX: f64 = 12.0;
/// Relative box-size change per unit of drift above 1.
const DRIFT_BOX_REL: f64 = 0.1;
/// Translation (px) per unit of drift above 1.
const DRIFT_SHIFT_PX: f64 = 10.0;

/// Ranges used to draw cow templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryPrior {
    pub canvas: f64,
    pub spacing: (f64, f64),
    pub vertex_jitter: f64,
    pub teat_w: (f64, f64),
    pub teat_h: (f64, f64),
    pub udder_margin: (f64, f64),
}

impl Default for GeometryPrior {
    fn default() -> Self {
        Self {
            canvas: 400.0,
            spacing: (80.0, 200.0),
            vertex_jitter: 12.0,
            teat_w: (14.0, 30.0),
            teat_h: (24.0, 56.0),
            udder_margin: (20.0, 50.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CowTemplate {
    pub cow_id: String,
    /// Teat centers in cyclic order LF, RF, RR, LR.
    pub centers: [(f64, f64); 4],
    /// Teat box `(w, h)` in the same order.
    pub teat_dims: [(f64, f64); 4],
    pub udder_box: BoxRect,
    pub texture_seed: u64,
}

impl CowTemplate {
    fn points(&self) -> [Point; 4] {
        self.centers.map(|(x, y)| Point::new(x, y))
    }

    /// The noise-free annotation of this cow.
    pub fn annotation(&self, image: &str) -> UdderAnnotation {
        build_annotation(image, &self.points(), &self.teat_dims, self.udder_box)
            .expect("templates are valid by construction")
    }
}

/// Session noise. Sigmas are in pixels (centers) or relative units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub center_sigma: f64,
    pub box_sigma: f64,
    pub scale_sigma: f64,
    /// Applied to sessions of collection 2 and later; 1 disables drift.
    pub drift: f64,
}

impl NoiseModel {
    pub fn new(center_sigma: f64, box_sigma: f64, scale_sigma: f64, drift: f64) -> Result<Self> {
        let m = Self {
            center_sigma,
            box_sigma,
            scale_sigma,
            drift,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn zero() -> Self {
        Self {
            center_sigma: 0.0,
            box_sigma: 0.0,
            scale_sigma: 0.0,
            drift: 1.0,
        }
    }

    pub fn low() -> Self {
        Self {
            center_sigma: 1.0,
            box_sigma: 0.02,
            scale_sigma: 0.02,
            drift: 1.0,
        }
    }

    pub fn high() -> Self {
        Self {
            center_sigma: 15.0,
            box_sigma: 0.10,
            scale_sigma: 0.10,
            drift: 1.0,
        }
    }

    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.center_sigma, self.box_sigma, self.scale_sigma];
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument(format!("noise sigmas must be >= 0: {self:?}")));
        }
        if !self.drift.is_finite() || self.drift < 1.0 {
            return Err(Error::InvalidArgument(format!("drift factor must be >= 1, got {}", self.drift)));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::low()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Session {
    pub collection: u32,
    pub day: u32,
}

impl Session {
    pub fn new(collection: u32, day: u32) -> Self {
        Self { collection, day }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Cow ids are `cow-001`, `cow-002`, ... (wider when needed).
pub fn cow_id(index: usize, count: usize) -> String {
    let width = count.to_string().len().max(3);
    format!("cow-{:0width$}", index + 1)
}

/// Draw `count` templates. Deterministic in `master_seed`.
pub fn generate_herd(count: usize, master_seed: u64, prior: &GeometryPrior) -> Vec<CowTemplate> {
    (0..count)
        .map(|i| {
            let mut rng = seed::rng(seed::derive(master_seed, &[i as u64]));
            draw_template(cow_id(i, count), &mut rng, prior)
        })
        .collect()
}

fn draw_template(cow_id: String, rng: &mut ChaCha8Rng, prior: &GeometryPrior) -> CowTemplate {
    let texture_seed: u64 = rng.random();
    let mid = prior.canvas / 2.0;
    loop {
        let cx = mid + uniform(rng, (-15.0, 15.0));
        let cy = mid + uniform(rng, (-15.0, 15.0));
        let front = uniform(rng, prior.spacing);
        let rear = uniform(rng, prior.spacing);
        let length = uniform(rng, prior.spacing);
        let j = prior.vertex_jitter;
        let mut jit = || uniform(rng, (-j, j));
        // cow faces left: front teats at smaller x
        let centers = [
            (cx - length / 2.0 + jit(), cy - front / 2.0 + jit()),
            (cx - length / 2.0 + jit(), cy + front / 2.0 + jit()),
            (cx + length / 2.0 + jit(), cy + rear / 2.0 + jit()),
            (cx + length / 2.0 + jit(), cy - rear / 2.0 + jit()),
        ];
        let teat_dims: [(f64, f64); 4] =
            std::array::from_fn(|_| (uniform(rng, prior.teat_w), uniform(rng, prior.teat_h)));
        let points = centers.map(|(x, y)| Point::new(x, y));
        if check_convex_order(&points) != Convexity::Valid {
            continue;
        }
        let edges_ok = (0..4).all(|i| {
            let (a, b) = (centers[i], centers[(i + 1) % 4]);
            let d = (a.0 - b.0).hypot(a.1 - b.1);
            d >= prior.spacing.0 * 0.8 && d <= prior.spacing.1 * 1.2
        });
        if !edges_ok {
            continue;
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for ((x, y), (w, h)) in centers.iter().zip(&teat_dims) {
            x0 = x0.min(x - w / 2.0);
            y0 = y0.min(y - h / 2.0);
            x1 = x1.max(x + w / 2.0);
            y1 = y1.max(y + h / 2.0);
        }
        let m = [
            uniform(rng, prior.udder_margin),
            uniform(rng, prior.udder_margin),
            uniform(rng, prior.udder_margin),
            uniform(rng, prior.udder_margin),
        ];
        let udder_box = BoxRect::new(x0 - m[0], y0 - m[1], x1 - x0 + m[0] + m[2], y1 - y0 + m[1] + m[3]);
        if udder_box.x < 0.0
            || udder_box.y < 0.0
            || udder_box.x + udder_box.w > prior.canvas
            || udder_box.y + udder_box.h > prior.canvas
        {
            continue;
        }
        return CowTemplate {
            cow_id,
            centers,
            teat_dims,
            udder_box,
            texture_seed,
        };
    }
}

fn build_annotation(
    image: &str,
    centers: &[Point; 4],
    dims: &[(f64, f64); 4],
    udder: BoxRect,
) -> Result<UdderAnnotation> {
    let teats = TeatPosition::CYCLE
        .iter()
        .zip(centers.iter().zip(dims))
        .map(|(&pos, (c, &(w, h)))| TeatBox::new(pos, BoxRect::new(c.x - w / 2.0, c.y - h / 2.0, w, h)))
        .collect();
    UdderAnnotation::new(image, udder, teats)
}

/// One noisy observation of `template`.
///
/// Deterministic in `(template, noise, session, seed)`. Draws are repeated
/// until the teat centers form a convex quadrilateral.
pub fn sample_session(
    template: &CowTemplate,
    noise: &NoiseModel,
    session: Session,
    seed_value: u64,
    image: &str,
) -> UdderAnnotation {
    let mut centers = template.points();
    let mut dims = template.teat_dims;
    let mut udder = template.udder_box;
    let later = session.collection >= 2;

    if later && noise.drift > 1.0 {
        // persistent across days of the same collection
        let excess = noise.drift - 1.0;
        let mut rng = seed::rng(seed::derive(template.texture_seed, &[session.collection as u64, 0xD81F]));
        for _ in 0..64 {
            let shift = (
                uniform(&mut rng, (-1.0, 1.0)) * DRIFT_SHIFT_PX * excess,
                uniform(&mut rng, (-1.0, 1.0)) * DRIFT_SHIFT_PX * excess,
            );
            let moved: [Point; 4] = std::array::from_fn(|i| {
                Point::new(
                    centers[i].x + shift.0 + normal(&mut rng) * DRIFT_CENTER_PX * excess,
                    centers[i].y + shift.1 + normal(&mut rng) * DRIFT_CENTER_PX * excess,
                )
            });
            if check_convex_order(&moved) == Convexity::Valid {
                centers = moved;
                for d in dims.iter_mut() {
                    d.0 *= (1.0 + normal(&mut rng) * DRIFT_BOX_REL * excess).max(0.2);
                    d.1 *= (1.0 + normal(&mut rng) * DRIFT_BOX_REL * excess).max(0.2);
                }
                udder.x += shift.0;
                udder.y += shift.1;
                udder.w *= (1.0 + normal(&mut rng) * DRIFT_BOX_REL * excess).max(0.2);
                udder.h *= (1.0 + normal(&mut rng) * DRIFT_BOX_REL * excess).max(0.2);
                break;
            }
        }
    }

    let mult = if later { noise.drift } else { 1.0 };
    let mut rng = seed::rng(seed::derive(seed_value, &[session.collection as u64, session.day as u64]));
    loop {
        let scale = (1.0 + normal(&mut rng) * noise.scale_sigma).max(0.5);
        let pivot = Point::new(udder.x + udder.w / 2.0, udder.y + udder.h / 2.0);
        let jittered: [Point; 4] = std::array::from_fn(|i| {
            let mut p = Point::new(
                centers[i].x + normal(&mut rng) * noise.center_sigma * mult,
                centers[i].y + normal(&mut rng) * noise.center_sigma * mult,
            );
            if scale != 1.0 {
                p = Point::new(pivot.x + (p.x - pivot.x) * scale, pivot.y + (p.y - pivot.y) * scale);
            }
            p
        });
        let box_factor = |rng: &mut ChaCha8Rng| (1.0 + normal(rng) * noise.box_sigma * mult).max(0.2) * scale;
        let teat_dims: [(f64, f64); 4] =
            std::array::from_fn(|i| (dims[i].0 * box_factor(&mut rng), dims[i].1 * box_factor(&mut rng)));
        let uw = udder.w * box_factor(&mut rng);
        let uh = udder.h * box_factor(&mut rng);
        let udder_box = if uw == udder.w && uh == udder.h {
            udder
        } else {
            BoxRect::new(pivot.x - uw / 2.0, pivot.y - uh / 2.0, uw, uh)
        };
        if check_convex_order(&jittered) != Convexity::Valid {
            continue;
        }
        if let Ok(ann) = build_annotation(image, &jittered, &teat_dims, udder_box) {
            return ann;
        }
    }
}

/// One synthetic observation with its identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecord {
    pub cow_id: String,
    pub session: Session,
    pub texture_seed: u64,
    pub annotation: UdderAnnotation,
}

/// Herd layout for [`generate_records`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerdConfig {
    /// Cows per collection.
    pub count: usize,
    /// 1 or 2 collections.
    pub collections: u32,
    /// Cows present in both collections (ignored with one collection).
    pub shared: usize,
    pub noise: NoiseModel,
    pub seed: u64,
    pub prior: GeometryPrior,
}

impl HerdConfig {
    pub fn new(count: usize, noise: NoiseModel, seed: u64) -> Self {
        Self {
            count,
            collections: 1,
            shared: count,
            noise,
            seed,
            prior: GeometryPrior::default(),
        }
    }

    /// Cows appearing in each collection, as template indices.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![(0..self.count).collect::<Vec<_>>()];
        if self.collections >= 2 {
            let shared = self.shared.min(self.count);
            let fresh = self.count - shared;
            out.push((0..shared).chain(self.count..self.count + fresh).collect());
        }
        out
    }

    pub fn total_cows(&self) -> usize {
        if self.collections >= 2 {
            self.count + self.count - self.shared.min(self.count)
        } else {
            self.count
        }
    }
}

/// Per-cow session seed.
pub fn cow_session_seed(master: u64, cow_id: &str) -> u64 {
    seed::derive(master, &[seed::hash_str(cow_id), 0x5E55])
}

/// Sample day 1 and day 2 of every cow in every collection.
pub fn generate_records(cfg: &HerdConfig) -> Result<Vec<SyntheticRecord>> {
    if cfg.count == 0 {
        return Err(Error::InvalidArgument("herd size must be at least 1".into()));
    }
    if !(1..=2).contains(&cfg.collections) {
        return Err(Error::InvalidArgument(format!(
            "collections must be 1 or 2, got {}",
            cfg.collections
        )));
    }
    cfg.noise.validate()?;
    let herd = generate_herd(cfg.total_cows(), cfg.seed, &cfg.prior);
    let mut out = Vec::new();
    for (ci, members) in cfg.members().iter().enumerate() {
        let collection = ci as u32 + 1;
        for &i in members {
            let t = &herd[i];
            for day in [1, 2] {
                let session = Session::new(collection, day);
                let image = format!("c{collection}_{}_d{day}.png", t.cow_id);
                let annotation =
                    sample_session(t, &cfg.noise, session, cow_session_seed(cfg.seed, &t.cow_id), &image);
                out.push(SyntheticRecord {
                    cow_id: t.cow_id.clone(),
                    session,
                    texture_seed: t.texture_seed,
                    annotation,
                });
            }
        }
    }
    Ok(out)
}

/// Geometry-only dataset built straight from synthetic records.
pub fn records_to_dataset(records: &[SyntheticRecord], normalize: bool) -> Result<Dataset> {
    let samples = records
        .iter()
        .map(|r| {
            let g = geometric_features(&r.annotation, normalize)?;
            Ok(Sample {
                cow_id: r.cow_id.clone(),
                collection: r.session.collection,
                day: r.session.day,
                features: FeatureVector::new(FeatureLayout::Geometry17, g.to_vec())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)
}

/// Write records as one manifest per collection under `dir`:
/// `collection{c}/manifest.json`, `collection{c}/annotations/*.json` and,
/// when `render` gives a canvas size, `collection{c}/images/*.png`.
/// Returns the manifest paths.
pub fn write_records(
    records: &[SyntheticRecord],
    dir: &Path,
    render: Option<(u32, u32)>,
) -> Result<Vec<PathBuf>> {
    let mut by_collection: BTreeMap<u32, Vec<&SyntheticRecord>> = BTreeMap::new();
    for r in records {
        by_collection.entry(r.session.collection).or_default().push(r);
    }
    let mut paths = Vec::new();
    for (collection, recs) in by_collection {
        let root = dir.join(format!("collection{collection}"));
        let mut entries = Vec::with_capacity(recs.len());
        for r in recs {
            let stem = r.annotation.image().trim_end_matches(".png").to_string();
            let annotation = PathBuf::from("annotations").join(format!("{stem}.json"));
            save_annotation(&r.annotation, root.join(&annotation))?;
            let image = match render {
                Some(size) => {
                    let rel = PathBuf::from("images").join(r.annotation.image());
                    let out = root.join(&rel);
                    if let Some(parent) = out.parent() {
                        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                    }
                    render_synthetic_image(&r.annotation, r.texture_seed, size)?.save_png(&out)?;
                    Some(rel)
                }
                None => None,
            };
            entries.push(ManifestEntry {
                cow_id: r.cow_id.clone(),
                day: r.session.day,
                image,
                rotation_deg: 0.0,
                crop: None,
                annotation,
            });
        }
        let path = root.join("manifest.json");
        save_manifest(&Manifest::new(collection, entries), &path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Procedural NIR-like frame: smooth noise, dark curved "veins" anchored
/// to the udder box, and brighter teat blobs.
pub fn render_synthetic_image(
    ann: &UdderAnnotation,
    texture_seed: u64,
    size: (u32, u32),
) -> Result<GrayImage> {
    let (w, h) = size;
    let inside = |b: &BoxRect| b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= w as f64 && b.y + b.h <= h as f64;
    if !inside(&ann.udder_box()) {
        return Err(Error::BoxOutsideCanvas(format!("udder box {:?} on {w}x{h}", ann.udder_box())));
    }
    for t in ann.teats() {
        if !inside(&t.rect) {
            return Err(Error::BoxOutsideCanvas(format!("teat {} {:?} on {w}x{h}", t.position, t.rect)));
        }
    }

    let mut rng = seed::rng(texture_seed);
    let cell = 16.0;
    let gw = (w as f64 / cell).ceil() as usize + 2;
    let gh = (h as f64 / cell).ceil() as usize + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random_range(80.0..150.0)).collect();
    let mut field = vec![0.0f64; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let gx = x as f64 / cell;
            let gy = y as f64 / cell;
            let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
            let (fx, fy) = (gx - ix as f64, gy - iy as f64);
            let g = |a: usize, b: usize| grid[b * gw + a];
            let top = g(ix, iy) * (1.0 - fx) + g(ix + 1, iy) * fx;
            let bot = g(ix, iy + 1) * (1.0 - fx) + g(ix + 1, iy + 1) * fx;
            field[(y * w + x) as usize] = top * (1.0 - fy) + bot * fy + rng.random_range(-6.0..6.0);
        }
    }

    let ub = ann.udder_box();
    let mut dark = vec![0.0f64; (w * h) as usize];
    let veins = rng.random_range(3..8);
    for _ in 0..veins {
        let mut pt = || Point::new(ub.x + rng.random_range(0.0..1.0) * ub.w, ub.y + rng.random_range(0.0..1.0) * ub.h);
        let (p0, p1, p2) = (pt(), pt(), pt());
        let depth: f64 = rng.random_range(25.0..55.0);
        let width: f64 = rng.random_range(1.5..3.5);
        let steps = 200;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let bx = (1.0 - t) * (1.0 - t) * p0.x + 2.0 * (1.0 - t) * t * p1.x + t * t * p2.x;
            let by = (1.0 - t) * (1.0 - t) * p0.y + 2.0 * (1.0 - t) * t * p1.y + t * t * p2.y;
            let r = width.ceil() as i64;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (px, py) = (bx.round() as i64 + dx, by.round() as i64 + dy);
                    if px < 0 || py < 0 || px >= w as i64 || py >= h as i64 {
                        continue;
                    }
                    let d = ((px as f64 - bx).powi(2) + (py as f64 - by).powi(2)).sqrt();
                    if d <= width {
                        let v = &mut dark[(py as u32 * w + px as u32) as usize];
                        *v = v.max(depth * (1.0 - d / (width + 1.0)));
                    }
                }
            }
        }
    }

    for (f, d) in field.iter_mut().zip(&dark) {
        *f -= d;
    }

    for t in ann.teats() {
        let c = t.rect.center();
        let (rx, ry) = (t.rect.w / 2.0, t.rect.h / 2.0);
        let x0 = t.rect.x.floor().max(0.0) as u32;
        let y0 = t.rect.y.floor().max(0.0) as u32;
        let x1 = ((t.rect.x + t.rect.w).ceil() as u32).min(w);
        let y1 = ((t.rect.y + t.rect.h).ceil() as u32).min(h);
        for y in y0..y1 {
            for x in x0..x1 {
                let e = ((x as f64 + 0.5 - c.x) / rx).powi(2) + ((y as f64 + 0.5 - c.y) / ry).powi(2);
                if e <= 1.0 {
                    field[(y * w + x) as usize] += 70.0 * (1.0 - 0.5 * e);
                }
            }
        }
    }

    GrayImage::new(w, h, field.into_iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::teat_centers;

    #[test]
    fn herd_is_deterministic_and_valid() {
        let p = GeometryPrior::default();
        assert_eq!(generate_herd(1, 9, &p), generate_herd(1, 9, &p));
        let herd = generate_herd(75, 3, &p);
        let mut ids: Vec<&str> = herd.iter().map(|t| t.cow_id.as_str()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 75);
        assert_eq!(herd[0].cow_id, "cow-001");
        for t in &herd {
            assert_eq!(check_convex_order(&teat_centers(&t.annotation("x"))), Convexity::Valid);
        }
    }

    #[test]
    fn zero_noise_reproduces_template() {
        let t = &generate_herd(1, 5, &GeometryPrior::default())[0];
        let ann = sample_session(t, &NoiseModel::zero(), Session::new(1, 2), 77, "x");
        assert_eq!(ann, t.annotation("x"));
        let later = sample_session(t, &NoiseModel::zero(), Session::new(2, 1), 77, "x");
        assert_eq!(later, t.annotation("x"));
    }

    #[test]
    fn sessions_are_seeded() {
        let t = &generate_herd(1, 5, &GeometryPrior::default())[0];
        let n = NoiseModel::high();
        let a = sample_session(t, &n, Session::new(1, 1), 3, "x");
        assert_eq!(a, sample_session(t, &n, Session::new(1, 1), 3, "x"));
        assert_ne!(a, sample_session(t, &n, Session::new(1, 2), 3, "x"));
    }

    #[test]
    fn drift_is_persistent_within_a_collection() {
        let t = &generate_herd(1, 8, &GeometryPrior::default())[0];
        let n = NoiseModel::zero().with_drift(2.0);
        let d1 = sample_session(t, &n, Session::new(2, 1), 1, "x");
        let d2 = sample_session(t, &n, Session::new(2, 2), 1, "x");
        assert_eq!(geometric_features(&d1, false).unwrap(), geometric_features(&d2, false).unwrap());
        assert_ne!(d1, t.annotation("x"));
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(NoiseModel::new(0.0, 0.0, 0.0, 0.5).is_err());
        assert!(NoiseModel::new(1.0, 0.1, 0.1, 1.5).is_ok());
    }

    #[test]
    fn records_layout() {
        let mut cfg = HerdConfig::new(5, NoiseModel::low(), 1);
        cfg.collections = 2;
        cfg.shared = 2;
        let recs = generate_records(&cfg).unwrap();
        assert_eq!(recs.len(), 20);
        let c2: Vec<&str> = recs
            .iter()
            .filter(|r| r.session.collection == 2 && r.session.day == 1)
            .map(|r| r.cow_id.as_str())
            .collect();
        assert_eq!(c2, vec!["cow-001", "cow-002", "cow-006", "cow-007", "cow-008"]);
        cfg.count = 0;
        assert!(generate_records(&cfg).is_err());
    }

    #[test]
    fn render_checks_canvas() {
        let t = &generate_herd(1, 5, &GeometryPrior::default())[0];
        let ann = t.annotation("x");
        let a = render_synthetic_image(&ann, t.texture_seed, (400, 400)).unwrap();
        assert_eq!(a, render_synthetic_image(&ann, t.texture_seed, (400, 400)).unwrap());
        let err = render_synthetic_image(&ann, t.texture_seed, (16, 16)).unwrap_err();
        assert_eq!(err.kind(), "box-outside-canvas");
    }
}
