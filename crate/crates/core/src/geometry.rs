//! Teat-geometry descriptor built from a four-teat annotation.
//!
//! The teat centers are walked in the cyclic label order LF → RF → RR → LR.
//! From that quadrilateral we take the four edge lengths and four interior
//! angles; each teat box contributes its area and aspect ratio, and the
//! udder box its aspect ratio, for 17 values in total.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Teat position: left/right × front/rear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TeatPosition {
    LF,
    RF,
    LR,
    RR,
}

impl TeatPosition {
    /// Positions in cyclic quadrilateral order.
    pub const CYCLE: [TeatPosition; 4] = [
        TeatPosition::LF,
        TeatPosition::RF,
        TeatPosition::RR,
        TeatPosition::LR,
    ];

    /// Index into [`TeatPosition::CYCLE`].
    pub fn cycle_index(self) -> usize {
        match self {
            TeatPosition::LF => 0,
            TeatPosition::RF => 1,
            TeatPosition::RR => 2,
            TeatPosition::LR => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TeatPosition::LF => "LF",
            TeatPosition::RF => "RF",
            TeatPosition::LR => "LR",
            TeatPosition::RR => "RR",
        }
    }
}

impl fmt::Display for TeatPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TeatPosition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LF" => Ok(TeatPosition::LF),
            "RF" => Ok(TeatPosition::RF),
            "LR" => Ok(TeatPosition::LR),
            "RR" => Ok(TeatPosition::RR),
            other => Err(Error::Parse {
                context: "teat position".into(),
                reason: format!("unknown position {other:?}"),
            }),
        }
    }
}

/// Axis-aligned box in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxRect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn aspect(&self) -> f64 {
        self.w / self.h
    }

    fn is_valid(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) && self.w > 0.0 && self.h > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, o: Point) -> (f64, f64) {
        (self.x - o.x, self.y - o.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeatBox {
    pub position: TeatPosition,
    #[serde(rename = "box")]
    pub rect: BoxRect,
}

impl TeatBox {
    pub fn new(position: TeatPosition, rect: BoxRect) -> Self {
        Self { position, rect }
    }
}

/// Four labeled teat boxes and the udder box for one frame.
///
/// Teats are stored in cyclic order (LF, RF, RR, LR) regardless of the
/// order they were supplied in.
#[derive(Debug, Clone, PartialEq)]
pub struct UdderAnnotation {
    image: String,
    udder_box: BoxRect,
    teats: [TeatBox; 4],
}

impl UdderAnnotation {
    pub fn new(image: impl Into<String>, udder_box: BoxRect, teats: Vec<TeatBox>) -> Result<Self> {
        if !udder_box.is_valid() {
            return Err(Error::NonPositiveBox(format!("udder box {udder_box:?}")));
        }
        let mut slots: [Option<TeatBox>; 4] = [None; 4];
        for t in &teats {
            let slot = &mut slots[t.position.cycle_index()];
            if slot.is_some() {
                return Err(Error::DuplicatePosition(t.position.to_string()));
            }
            if !t.rect.is_valid() {
                return Err(Error::NonPositiveBox(format!("teat {} {:?}", t.position, t.rect)));
            }
            *slot = Some(*t);
        }
        let missing: Vec<&str> = TeatPosition::CYCLE
            .iter()
            .filter(|p| slots[p.cycle_index()].is_none())
            .map(|p| p.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingTeat(missing.join(",")));
        }
        Ok(Self {
            image: image.into(),
            udder_box,
            teats: slots.map(|s| s.expect("checked above")),
        })
    }

    pub fn image(&self) -> &str {
        &self.image
    }

    pub fn udder_box(&self) -> BoxRect {
        self.udder_box
    }

    /// Teats in cyclic order LF, RF, RR, LR.
    pub fn teats(&self) -> &[TeatBox; 4] {
        &self.teats
    }

    pub fn teat(&self, pos: TeatPosition) -> &TeatBox {
        &self.teats[pos.cycle_index()]
    }

    /// Apply `f` to every box (teats and udder), keeping labels.
    pub fn map_boxes(&self, mut f: impl FnMut(BoxRect) -> BoxRect) -> Result<Self> {
        let teats = self.teats.iter().map(|t| TeatBox::new(t.position, f(t.rect))).collect();
        Self::new(self.image.clone(), f(self.udder_box), teats)
    }
}

/// Teat centers in cyclic order LF, RF, RR, LR.
pub fn teat_centers(ann: &UdderAnnotation) -> [Point; 4] {
    ann.teats.map(|t| t.rect.center())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Valid,
    Degenerate,
}

/// Strict convexity with consistent winding along LF → RF → RR → LR.
pub fn check_convex_order(centers: &[Point; 4]) -> Convexity {
    let mut sign = 0.0f64;
    for i in 0..4 {
        let a = centers[i];
        let b = centers[(i + 1) % 4];
        let c = centers[(i + 2) % 4];
        let (e1x, e1y) = b.sub(a);
        let (e2x, e2y) = c.sub(b);
        let cross = e1x * e2y - e1y * e2x;
        if !cross.is_finite() || cross == 0.0 {
            return Convexity::Degenerate;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return Convexity::Degenerate;
        }
    }
    Convexity::Valid
}

fn require_convex(centers: &[Point; 4]) -> Result<()> {
    match check_convex_order(centers) {
        Convexity::Valid => Ok(()),
        Convexity::Degenerate => Err(Error::DegenerateGeometry(format!(
            "teat centers {:?} do not form a convex LF-RF-RR-LR quadrilateral",
            centers.map(|p| (p.x, p.y))
        ))),
    }
}

/// Edge lengths LF→RF, RF→RR, RR→LR, LR→LF.
pub fn edge_distances(centers: &[Point; 4]) -> Result<[f64; 4]> {
    require_convex(centers)?;
    Ok(std::array::from_fn(|i| {
        let (dx, dy) = centers[(i + 1) % 4].sub(centers[i]);
        dx.hypot(dy)
    }))
}

/// Interior angles in degrees at LF, RF, RR, LR.
pub fn interior_angles(centers: &[Point; 4]) -> Result<[f64; 4]> {
    require_convex(centers)?;
    Ok(std::array::from_fn(|i| {
        let v = centers[i];
        let (ax, ay) = centers[(i + 3) % 4].sub(v);
        let (bx, by) = centers[(i + 1) % 4].sub(v);
        let cos = (ax * bx + ay * by) / (ax.hypot(ay) * bx.hypot(by));
        cos.clamp(-1.0, 1.0).acos().to_degrees()
    }))
}

/// The 17-value geometric descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFeatures {
    pub distances: [f64; 4],
    pub angles: [f64; 4],
    pub sizes: [f64; 4],
    pub aspects: [f64; 4],
    pub udder_aspect: f64,
}

impl GeometricFeatures {
    pub const DIM: usize = 17;

    /// distances, angles, sizes, aspects, udder aspect.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::DIM);
        v.extend_from_slice(&self.distances);
        v.extend_from_slice(&self.angles);
        v.extend_from_slice(&self.sizes);
        v.extend_from_slice(&self.aspects);
        v.push(self.udder_aspect);
        v
    }
}

/// Compute the descriptor. With `normalize`, distances are divided by
/// √(udder area) and sizes by the udder area.
pub fn geometric_features(ann: &UdderAnnotation, normalize: bool) -> Result<GeometricFeatures> {
    let centers = teat_centers(ann);
    let mut distances = edge_distances(&centers)?;
    let angles = interior_angles(&centers)?;
    let mut sizes = ann.teats.map(|t| t.rect.area());
    let aspects = ann.teats.map(|t| t.rect.aspect());
    let udder = ann.udder_box;
    if normalize {
        let area = udder.area();
        let side = area.sqrt();
        distances.iter_mut().for_each(|d| *d /= side);
        sizes.iter_mut().for_each(|s| *s /= area);
    }
    Ok(GeometricFeatures {
        distances,
        angles,
        sizes,
        aspects,
        udder_aspect: udder.aspect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: [(f64, f64); 4]) -> [Point; 4] {
        v.map(|(x, y)| Point::new(x, y))
    }

    fn square_annotation(scale: f64) -> UdderAnnotation {
        let corner = |p, x: f64, y: f64| {
            TeatBox::new(p, BoxRect::new(x * scale, y * scale, 10.0 * scale, 10.0 * scale))
        };
        UdderAnnotation::new(
            "f.png",
            BoxRect::new(0.0, 0.0, 100.0 * scale, 100.0 * scale),
            vec![
                corner(TeatPosition::LF, 20.0, 20.0),
                corner(TeatPosition::RF, 60.0, 20.0),
                corner(TeatPosition::RR, 60.0, 60.0),
                corner(TeatPosition::LR, 20.0, 60.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn centers_of_boxes() {
        assert_eq!(BoxRect::new(0.0, 0.0, 10.0, 20.0).center(), Point::new(5.0, 10.0));
        assert_eq!(BoxRect::new(3.0, 3.0, 1.0, 1.0).center(), Point::new(3.5, 3.5));
        let ann = UdderAnnotation::new(
            "x",
            BoxRect::new(0.0, 0.0, 5.0, 5.0),
            vec![
                TeatBox::new(TeatPosition::LR, BoxRect::new(0.0, 1.0, 2.0, 2.0)),
                TeatBox::new(TeatPosition::LF, BoxRect::new(0.0, 0.0, 2.0, 2.0)),
                TeatBox::new(TeatPosition::RR, BoxRect::new(1.0, 1.0, 2.0, 2.0)),
                TeatBox::new(TeatPosition::RF, BoxRect::new(1.0, 0.0, 2.0, 2.0)),
            ],
        )
        .unwrap();
        assert_eq!(teat_centers(&ann), pts([(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]));
    }

    #[test]
    fn annotation_validation() {
        let b = BoxRect::new(0.0, 0.0, 1.0, 1.0);
        let three = vec![
            TeatBox::new(TeatPosition::LF, b),
            TeatBox::new(TeatPosition::RF, b),
            TeatBox::new(TeatPosition::RR, b),
        ];
        let err = UdderAnnotation::new("x", b, three.clone()).unwrap_err();
        assert_eq!(err.kind(), "missing-teat");
        assert!(err.to_string().contains("LR"));
        let mut dup = three.clone();
        dup.push(TeatBox::new(TeatPosition::RF, b));
        assert_eq!(UdderAnnotation::new("x", b, dup).unwrap_err().kind(), "duplicate-position");
        let mut zero = three;
        zero.push(TeatBox::new(TeatPosition::LR, BoxRect::new(0.0, 0.0, 0.0, 1.0)));
        assert_eq!(UdderAnnotation::new("x", b, zero).unwrap_err().kind(), "non-positive-box");
    }

    #[test]
    fn square_and_rectangle() {
        let sq = pts([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(edge_distances(&sq).unwrap(), [1.0; 4]);
        for a in interior_angles(&sq).unwrap() {
            assert!((a - 90.0).abs() < 1e-12);
        }
        let rect = pts([(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)]);
        assert_eq!(edge_distances(&rect).unwrap(), [2.0, 1.0, 2.0, 1.0]);
        for a in interior_angles(&rect).unwrap() {
            assert!((a - 90.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_matches_hand_vectors() {
        let t = pts([(0.0, 0.0), (4.0, 0.0), (3.0, 2.0), (1.0, 2.0)]);
        let ang = interior_angles(&t).unwrap();
        // at LF: vectors (4,0) and (1,2); at RR: (-2,0) and (1,-2)
        let lf = (4.0f64 / (4.0 * 5f64.sqrt())).acos().to_degrees();
        let rr = (-2.0f64 / (2.0 * 5f64.sqrt())).acos().to_degrees();
        assert!((ang[0] - lf).abs() < 1e-9);
        assert!((ang[1] - lf).abs() < 1e-9);
        assert!((ang[2] - rr).abs() < 1e-9);
        assert!((ang[3] - rr).abs() < 1e-9);
        assert!((ang.iter().sum::<f64>() - 360.0).abs() < 1e-9);
    }

    #[test]
    fn convexity_classification() {
        let sq = pts([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(check_convex_order(&sq), Convexity::Valid);
        let swapped = pts([(1.0, 0.0), (0.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(check_convex_order(&swapped), Convexity::Degenerate);
        let collinear = pts([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)]);
        assert_eq!(check_convex_order(&collinear), Convexity::Degenerate);
        let coincident = pts([(0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(check_convex_order(&coincident), Convexity::Degenerate);
        assert_eq!(edge_distances(&swapped).unwrap_err().kind(), "degenerate-geometry");
        assert!(interior_angles(&collinear).is_err());
        // reverse winding is still a consistent cycle
        let cw = pts([(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        assert_eq!(check_convex_order(&cw), Convexity::Valid);
    }

    #[test]
    fn square_layout_features() {
        let f = geometric_features(&square_annotation(1.0), false).unwrap();
        assert_eq!(f.sizes, [100.0; 4]);
        assert_eq!(f.aspects, [1.0; 4]);
        assert_eq!(f.distances, [40.0; 4]);
        assert!(f.angles.iter().all(|a| (a - 90.0).abs() < 1e-12));
        assert_eq!(f.udder_aspect, 1.0);
        assert_eq!(f.to_vec().len(), 17);
    }

    #[test]
    fn doubling_scales_distances_and_sizes() {
        let a = geometric_features(&square_annotation(1.0), false).unwrap();
        let b = geometric_features(&square_annotation(2.0), false).unwrap();
        for i in 0..4 {
            assert!((b.distances[i] - 2.0 * a.distances[i]).abs() < 1e-9);
            assert!((b.sizes[i] - 4.0 * a.sizes[i]).abs() < 1e-9);
            assert!((b.angles[i] - a.angles[i]).abs() < 1e-9);
            assert_eq!(b.aspects[i], a.aspects[i]);
        }
        let na = geometric_features(&square_annotation(1.0), true).unwrap().to_vec();
        let nb = geometric_features(&square_annotation(2.0), true).unwrap().to_vec();
        for (x, y) in na.iter().zip(&nb) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn position_parsing() {
        assert_eq!("RR".parse::<TeatPosition>().unwrap(), TeatPosition::RR);
        assert_eq!("XX".parse::<TeatPosition>().unwrap_err().kind(), "parse-error");
    }
}
