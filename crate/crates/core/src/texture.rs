//! Rotation-invariant local binary patterns.
//!
//! Each pixel is compared with 8 samples on a circle of radius 1 or 2
//! around it, ordered counter-clockwise starting at 0° (pointing right).
//! Bit `k` is set when the center is strictly brighter than sample `k`.
//! Codes are then folded into the 36 classes of 8-bit strings under cyclic
//! rotation, and counted over every pixel whose circle fits in the image.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Number of rotation-invariant classes of 8-bit codes.
pub const NUM_CLASSES: usize = 36;

/// Bit `k` is 1 iff `center > neighbors[k]`.
pub fn lbp_code(center: u8, neighbors: [u8; 8]) -> u8 {
    neighbors
        .iter()
        .enumerate()
        .fold(0u8, |code, (k, &n)| code | (((center > n) as u8) << k))
}

/// Map from every 8-bit code to its rotation-invariant class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecklaceTable {
    class_of_code: [u8; 256],
    canonical_codes: Vec<u8>,
}

impl NecklaceTable {
    pub fn build() -> Self {
        let canonical = |c: u8| (0..8).map(|r| c.rotate_right(r)).min().unwrap();
        let mut canonical_codes: Vec<u8> = (0..=255u8).map(canonical).collect();
        canonical_codes.sort_unstable();
        canonical_codes.dedup();
        let mut class_of_code = [0u8; 256];
        for code in 0..=255u8 {
            let idx = canonical_codes
                .binary_search(&canonical(code))
                .expect("canonical form is in the table");
            class_of_code[code as usize] = idx as u8;
        }
        Self {
            class_of_code,
            canonical_codes,
        }
    }

    /// Shared, lazily built table.
    pub fn global() -> &'static NecklaceTable {
        static TABLE: OnceLock<NecklaceTable> = OnceLock::new();
        TABLE.get_or_init(NecklaceTable::build)
    }

    #[inline]
    pub fn class_of(&self, code: u8) -> usize {
        self.class_of_code[code as usize] as usize
    }

    /// Sorted rotation-minimal representatives; index i is class i.
    pub fn canonical_codes(&self) -> &[u8] {
        &self.canonical_codes
    }

    pub fn num_classes(&self) -> usize {
        self.canonical_codes.len()
    }
}

pub fn build_necklace_table() -> NecklaceTable {
    NecklaceTable::build()
}

/// Whole-image LBP class histogram, normalized by the number of valid centers.
pub fn lbp_histogram(img: &GrayImage, radius: u32) -> Result<[f64; NUM_CLASSES]> {
    let counts = lbp_counts(img, radius)?;
    let total: u64 = counts.iter().sum();
    let mut hist = [0.0; NUM_CLASSES];
    for (h, &c) in hist.iter_mut().zip(&counts) {
        *h = c as f64 / total as f64;
    }
    Ok(hist)
}

/// Raw per-class counts over all valid centers.
pub fn lbp_counts(img: &GrayImage, radius: u32) -> Result<[u64; NUM_CLASSES]> {
    if radius != 1 && radius != 2 {
        return Err(Error::UnsupportedRadius(radius));
    }
    let (w, h) = (img.width(), img.height());
    if w <= 2 * radius || h <= 2 * radius {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: 2 * radius,
        });
    }
    let table = NecklaceTable::global();
    let mut counts = [0u64; NUM_CLASSES];
    for y in radius..h - radius {
        for x in radius..w - radius {
            let code = if radius == 1 {
                code_radius1(img, x, y)
            } else {
                code_radius2(img, x, y)
            };
            counts[table.class_of(code)] += 1;
        }
    }
    Ok(counts)
}

fn code_radius1(img: &GrayImage, x: u32, y: u32) -> u8 {
    let p = |dx: i32, dy: i32| img.get((x as i32 + dx) as u32, (y as i32 + dy) as u32);
    // counter-clockwise on screen from 0°: right, up-right, up, ...
    lbp_code(
        img.get(x, y),
        [
            p(1, 0),
            p(1, -1),
            p(0, -1),
            p(-1, -1),
            p(-1, 0),
            p(-1, 1),
            p(0, 1),
            p(1, 1),
        ],
    )
}

/// Radius-2 code. Axis samples are exact pixels. Diagonal samples sit at
/// (±√2, ±√2), so their bilinear weights are (2-√2)², (√2-1)(2-√2) twice
/// and (√2-1)² for the inner, the two side, and the outer pixel. Writing
/// the interpolated value minus the center as `P + Q·√2` with integer
/// `P`, `Q` makes the comparison exact.
fn code_radius2(img: &GrayImage, x: u32, y: u32) -> u8 {
    let c = img.get(x, y) as i64;
    let p = |dx: i32, dy: i32| img.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i64;
    // bit set when the center is brighter, i.e. sample - center < 0
    let axis = |v: i64| (v - c) < 0;
    let diag = |sx: i32, sy: i32| {
        let inner = p(sx, sy) - c;
        let side = p(2 * sx, sy) + p(sx, 2 * sy) - 2 * c;
        let outer = p(2 * sx, 2 * sy) - c;
        // (6-4√2)·inner + (3√2-4)·side + (3-2√2)·outer
        let rational = 6 * inner - 4 * side + 3 * outer;
        let irrational = -4 * inner + 3 * side - 2 * outer;
        sign_of_surd(rational, irrational) < 0
    };
    let bits = [
        axis(p(2, 0)),
        diag(1, -1),
        axis(p(0, -2)),
        diag(-1, -1),
        axis(p(-2, 0)),
        diag(-1, 1),
        axis(p(0, 2)),
        diag(1, 1),
    ];
    bits.iter()
        .enumerate()
        .fold(0u8, |code, (k, &b)| code | ((b as u8) << k))
}

/// Sign of `a + b·√2` for integers `a`, `b`.
fn sign_of_surd(a: i64, b: i64) -> i32 {
    let sa = a.signum();
    let sb = b.signum();
    if sa == sb || sb == 0 {
        return sa as i32;
    }
    if sa == 0 {
        return sb as i32;
    }
    // opposite signs: compare a² with 2b²
    let lhs = a * a;
    let rhs = 2 * b * b;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => sa as i32,
        std::cmp::Ordering::Less => sb as i32,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Radius-1 and radius-2 histograms of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureFeatures {
    pub hist_r1: [f64; NUM_CLASSES],
    pub hist_r2: [f64; NUM_CLASSES],
}

impl TextureFeatures {
    pub const DIM: usize = 2 * NUM_CLASSES;

    /// r1 classes 0..35 followed by r2 classes 0..35.
    pub fn to_vec(&self) -> Vec<f64> {
        self.hist_r1.iter().chain(&self.hist_r2).copied().collect()
    }
}

pub fn texture_features(img: &GrayImage) -> Result<TextureFeatures> {
    Ok(TextureFeatures {
        hist_r2: lbp_histogram(img, 2)?,
        hist_r1: lbp_histogram(img, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_examples() {
        assert_eq!(lbp_code(5, [5; 8]), 0);
        assert_eq!(lbp_code(10, [0; 8]), 255);
        assert_eq!(lbp_code(10, [0, 20, 0, 20, 0, 20, 0, 20]), 0b0101_0101);
    }

    #[test]
    fn table_basics() {
        let t = NecklaceTable::build();
        assert_eq!(t.num_classes(), 36);
        assert_eq!(t.class_of(0), 0);
        assert_eq!(t.class_of(0b0000_0001), t.class_of(0b0001_0000));
        assert_eq!(t.class_of(255), 35);
        assert!(t.canonical_codes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn surd_sign() {
        assert_eq!(sign_of_surd(0, 0), 0);
        assert_eq!(sign_of_surd(3, -2), 1); // 3 - 2.83
        assert_eq!(sign_of_surd(-3, 2), -1);
        assert_eq!(sign_of_surd(1, -1), -1);
        assert_eq!(sign_of_surd(-1, 0), -1);
        assert_eq!(sign_of_surd(0, 5), 1);
    }

    #[test]
    fn constant_image_is_all_zero_code() {
        let img = GrayImage::filled(9, 9, 7).unwrap();
        for r in [1, 2] {
            let h = lbp_histogram(&img, r).unwrap();
            assert_eq!(h[0], 1.0);
            assert!(h[1..].iter().all(|&v| v == 0.0));
        }
        let tf = texture_features(&img).unwrap();
        assert_eq!(tf.to_vec().len(), 72);
        assert_eq!(tf.to_vec()[36], 1.0);
    }

    #[test]
    fn too_small_and_bad_radius() {
        let img = GrayImage::filled(4, 9, 1).unwrap();
        assert_eq!(lbp_histogram(&img, 2).unwrap_err().kind(), "image-too-small");
        assert!(lbp_histogram(&img, 1).is_ok());
        assert_eq!(lbp_histogram(&img, 3).unwrap_err().kind(), "unsupported-radius");
        assert!(texture_features(&img).is_err());
    }

    #[test]
    fn single_center_radius1() {
        // center brighter than everything except the sample straight up
        let img = GrayImage::new(3, 3, vec![1, 9, 1, 1, 5, 1, 1, 1, 1]).unwrap();
        let h = lbp_counts(&img, 1).unwrap();
        let t = NecklaceTable::global();
        assert_eq!(h[t.class_of(0b1111_1011)], 1);
        assert_eq!(h.iter().sum::<u64>(), 1);
    }

    #[test]
    fn radius2_diagonal_tie_is_exact() {
        // inner = c-1, outer = c+2, sides = c: interpolated value equals c
        let mut px = vec![50u8; 25];
        px[2 * 5 + 2] = 50;
        px[5 + 3] = 49; // inner of the up-right diagonal
        px[4] = 52; // outer of the up-right diagonal
        let img = GrayImage::new(5, 5, px).unwrap();
        let counts = lbp_counts(&img, 2).unwrap();
        assert_eq!(counts[0], 1);
    }
}
