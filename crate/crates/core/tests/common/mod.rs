//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udderid::geometry::{BoxRect, TeatBox, TeatPosition, UdderAnnotation};
use udderid::GrayImage;

/// Equivalence classes of 8-bit strings under cyclic rotation, found by
/// union over explicit rotations. Returns the class id per code, with ids
/// ordered by the smallest member of each class.
pub fn brute_force_necklaces() -> Vec<usize> {
    let mut class = vec![usize::MAX; 256];
    let mut reps: Vec<u8> = Vec::new();
    for code in 0..256usize {
        if class[code] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(code as u8);
        let mut c = code as u8;
        for _ in 0..8 {
            class[c as usize] = id;
            c = c.rotate_left(1);
        }
    }
    class
}

/// Naive LBP histogram: samples the circle at `radius` with trigonometry
/// and generic bilinear interpolation, comparing `sample - center` against
/// zero. Radius 1 rounds the offsets onto the 8 adjacent pixels; at
/// radius 2 offsets within 1e-9 of an integer are snapped.
///
/// An interpolated diagonal difference is P + Q√2 with integers
/// |P| ≤ 17·255 and |Q| ≤ 12·255, so when it is not zero its magnitude is at
/// least 1/|P - Q√2| > 1e-4. Anything under 1e-6 is therefore an exact tie
/// blurred by float rounding.
pub fn naive_histogram(img: &GrayImage, radius: u32, classes: &[usize]) -> Vec<f64> {
    let r = radius as f64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut counts = vec![0u64; 36];
    let mut total = 0u64;
    for y in 0..h {
        for x in 0..w {
            if x - (radius as i64) < 0 || y - (radius as i64) < 0 || x + (radius as i64) >= w || y + (radius as i64) >= h {
                continue;
            }
            let c = img.get(x as u32, y as u32) as f64;
            let mut code = 0u8;
            for k in 0..8 {
                let theta = (k as f64) * std::f64::consts::FRAC_PI_4;
                let snap = |v: f64| if radius == 1 || (v - v.round()).abs() < 1e-9 { v.round() } else { v };
                let sx = x as f64 + snap(r * theta.cos());
                let sy = y as f64 - snap(r * theta.sin());
                let x0 = sx.floor();
                let y0 = sy.floor();
                let fx = sx - x0;
                let fy = sy - y0;
                let px = |xx: f64, yy: f64| {
                    let xi = (xx as i64).clamp(0, w - 1) as u32;
                    let yi = (yy as i64).clamp(0, h - 1) as u32;
                    img.get(xi, yi) as f64 - c
                };
                let diff = (1.0 - fx) * (1.0 - fy) * px(x0, y0)
                    + fx * (1.0 - fy) * px(x0 + 1.0, y0)
                    + (1.0 - fx) * fy * px(x0, y0 + 1.0)
                    + fx * fy * px(x0 + 1.0, y0 + 1.0);
                if diff < -1e-6 {
                    code |= 1 << k;
                }
            }
            counts[classes[code as usize]] += 1;
            total += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

pub fn random_image(rng: &mut ChaCha8Rng, w: u32, h: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random()).unwrap()
}

/// Random image with few gray levels, so ties are common.
pub fn random_coarse_image(rng: &mut ChaCha8Rng, w: u32, h: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random_range(0..4u8) * 60).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random strictly convex annotation: four teat centers on a jittered
/// ellipse in cyclic order, plus boxes.
pub fn random_convex_annotation(rng: &mut ChaCha8Rng) -> UdderAnnotation {
    let cx = rng.random_range(100.0..300.0);
    let cy = rng.random_range(100.0..300.0);
    let rx = rng.random_range(30.0..120.0);
    let ry = rng.random_range(30.0..120.0);
    let base = rng.random_range(0.0..std::f64::consts::TAU);
    let positions = [TeatPosition::LF, TeatPosition::RF, TeatPosition::RR, TeatPosition::LR];
    let teats = positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            // angles stay within their own quadrant, so the cycle is convex
            let a = base + (i as f64) * std::f64::consts::FRAC_PI_2 + rng.random_range(-0.6..0.6);
            let (x, y) = (cx + rx * a.cos(), cy + ry * a.sin());
            let bw = rng.random_range(5.0..40.0);
            let bh = rng.random_range(5.0..40.0);
            TeatBox::new(p, BoxRect::new(x - bw / 2.0, y - bh / 2.0, bw, bh))
        })
        .collect();
    let uw = rng.random_range(150.0..400.0);
    let uh = rng.random_range(150.0..400.0);
    UdderAnnotation::new("rand.png", BoxRect::new(cx - uw / 2.0, cy - uh / 2.0, uw, uh), teats).unwrap()
}

pub fn transform_annotation(
    ann: &UdderAnnotation,
    scale: f64,
    tx: f64,
    ty: f64,
) -> UdderAnnotation {
    ann.map_boxes(|b| BoxRect::new(b.x * scale + tx, b.y * scale + ty, b.w * scale, b.h * scale))
        .unwrap()
}
