//! Grayscale images, loading, and the rotate-then-crop preprocessing step.
//!
//! Angles are in degrees, counter-clockwise as the image is displayed (the
//! y axis points down). Rotation happens about the image center onto a
//! canvas sized to the rotated bounds, and the crop rectangle is expressed
//! in that rotated canvas.

use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Exact 90° counter-clockwise rotation. Output is `height x width`.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        // dst(x', y') = src(w - 1 - y', x')
        GrayImage::from_fn(h, w, |x, y| self.get(w - 1 - y, x)).expect("dims are positive")
    }

    pub fn rotate180(&self) -> GrayImage {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn rotate270(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        GrayImage::from_fn(h, w, |x, y| self.get(y, h - 1 - x)).expect("dims are positive")
    }

    /// Encode as an 8-bit grayscale PNG.
    pub fn to_png(&self) -> Vec<u8> {
        let buf = image::GrayImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length matches dims");
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)
            .expect("in-memory PNG encoding does not fail");
        out.into_inner()
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_png()).map_err(|e| Error::io(path, e))
    }
}

/// Crop rectangle in rotated-image pixel coordinates (origin top-left).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

impl CropRect {
    pub fn new(x: i64, y: i64, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self::new(0, 0, width, height)
    }

    fn fits(&self, width: u32, height: u32) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x >= 0
            && self.y >= 0
            && self.x + self.w as i64 <= width as i64
            && self.y + self.h as i64 <= height as i64
    }
}

/// Load a PNG or JPEG as grayscale using Rec.601 luma weights.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    decode_grayscale(&bytes).map_err(|reason| Error::UndecodableImage {
        path: path.to_path_buf(),
        reason,
    })
}

/// Decode in-memory PNG/JPEG bytes to grayscale.
pub fn decode_grayscale(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let format = image::guess_format(bytes).map_err(|e| e.to_string())?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Jpeg) {
        return Err(format!("unsupported format {format:?}"));
    }
    let decoded = image::load_from_memory_with_format(bytes, format).map_err(|e| e.to_string())?;
    let (width, height) = (decoded.width(), decoded.height());
    let pixels = match decoded {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luma601(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    GrayImage::new(width, height, pixels).map_err(|e| e.to_string())
}

/// Rec.601 luma, rounded to nearest. Integer arithmetic keeps it exact.
#[inline]
pub fn luma601(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Rotate `img` by `angle_deg` counter-clockwise about its center, then crop.
///
/// Multiples of 90° take the exact permutation path. Other angles use
/// bilinear interpolation with zero fill onto a canvas covering the rotated
/// bounds.
pub fn rotate_crop(img: &GrayImage, angle_deg: f64, rect: CropRect) -> Result<GrayImage> {
    let rotated = rotate(img, angle_deg)?;
    crop(&rotated, rect)
}

pub fn rotate(img: &GrayImage, angle_deg: f64) -> Result<GrayImage> {
    if !angle_deg.is_finite() {
        return Err(Error::InvalidArgument(format!("rotation angle {angle_deg}")));
    }
    let turns = angle_deg.rem_euclid(360.0);
    if turns % 90.0 == 0.0 {
        return Ok(match (turns / 90.0) as u32 {
            0 => img.clone(),
            1 => img.rotate90(),
            2 => img.rotate180(),
            _ => img.rotate270(),
        });
    }
    Ok(rotate_bilinear(img, turns.to_radians()))
}

fn rotate_bilinear(img: &GrayImage, theta: f64) -> GrayImage {
    let (w, h) = (img.width as f64, img.height as f64);
    let (sin, cos) = theta.sin_cos();
    let out_w = ((w * cos.abs() + h * sin.abs()) - 1e-6).ceil().max(1.0) as u32;
    let out_h = ((w * sin.abs() + h * cos.abs()) - 1e-6).ceil().max(1.0) as u32;
    let (scx, scy) = ((w - 1.0) / 2.0, (h - 1.0) / 2.0);
    let (dcx, dcy) = ((out_w as f64 - 1.0) / 2.0, (out_h as f64 - 1.0) / 2.0);

    GrayImage::from_fn(out_w, out_h, |x, y| {
        let dx = x as f64 - dcx;
        let dy = y as f64 - dcy;
        // inverse of the on-screen counter-clockwise rotation (y down)
        let sx = dx * cos - dy * sin + scx;
        let sy = dx * sin + dy * cos + scy;
        sample_bilinear(img, sx, sy)
    })
    .expect("dims are positive")
}

fn sample_bilinear(img: &GrayImage, sx: f64, sy: f64) -> u8 {
    const EPS: f64 = 1e-9;
    let max_x = (img.width - 1) as f64;
    let max_y = (img.height - 1) as f64;
    if sx < -EPS || sy < -EPS || sx > max_x + EPS || sy > max_y + EPS {
        return 0;
    }
    let sx = sx.clamp(0.0, max_x);
    let sy = sy.clamp(0.0, max_y);
    let x0 = sx.floor() as u32;
    let y0 = sy.floor() as u32;
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let fx = sx - x0 as f64;
    let fy = sy - y0 as f64;
    let top = img.get(x0, y0) as f64 * (1.0 - fx) + img.get(x1, y0) as f64 * fx;
    let bottom = img.get(x0, y1) as f64 * (1.0 - fx) + img.get(x1, y1) as f64 * fx;
    (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
}

pub fn crop(img: &GrayImage, rect: CropRect) -> Result<GrayImage> {
    if !rect.fits(img.width, img.height) {
        return Err(Error::CropOutOfBounds {
            rect,
            width: img.width,
            height: img.height,
        });
    }
    let (ox, oy) = (rect.x as u32, rect.y as u32);
    GrayImage::from_fn(rect.w, rect.h, |x, y| img.get(ox + x, oy + y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: u32, h: u32) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| ((x * 31 + y * 7) % 256) as u8).unwrap()
    }

    fn write_rgb_png(path: &Path, w: u32, h: u32, px: &[[u8; 3]]) {
        let raw: Vec<u8> = px.iter().flatten().copied().collect();
        image::RgbImage::from_raw(w, h, raw).unwrap().save(path).unwrap();
    }

    #[test]
    fn new_rejects_bad_dims() {
        assert!(GrayImage::new(0, 1, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn load_black_white_png() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bw.png");
        write_rgb_png(&p, 2, 1, &[[255, 255, 255], [0, 0, 0]]);
        let img = load_grayscale(&p).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[255, 0]);
    }

    #[test]
    fn load_gray_maps_to_itself() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.png");
        write_rgb_png(&p, 1, 1, &[[100, 100, 100]]);
        assert_eq!(load_grayscale(&p).unwrap().pixels(), &[100]);
    }

    #[test]
    fn load_jpeg() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.jpg");
        image::RgbImage::from_pixel(8, 8, image::Rgb([128, 128, 128]))
            .save(&p)
            .unwrap();
        let img = load_grayscale(&p).unwrap();
        assert_eq!((img.width(), img.height()), (8, 8));
        assert!(img.pixels().iter().all(|&v| (v as i32 - 128).abs() <= 2));
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let txt = dir.path().join("notes.txt");
        std::fs::write(&txt, "not an image").unwrap();
        assert_eq!(load_grayscale(&txt).unwrap_err().kind(), "undecodable-image");
        let missing = dir.path().join("nope.png");
        assert_eq!(load_grayscale(&missing).unwrap_err().kind(), "file-not-found");
    }

    #[test]
    fn luma_weights() {
        assert_eq!(luma601(255, 0, 0), 76);
        assert_eq!(luma601(0, 255, 0), 150);
        assert_eq!(luma601(0, 0, 255), 29);
    }

    #[test]
    fn identity_rotation_and_full_crop() {
        let img = ramp(7, 5);
        let out = rotate_crop(&img, 0.0, CropRect::full(7, 5)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn quarter_turn_is_permutation() {
        let img = ramp(7, 5);
        let out = rotate_crop(&img, 90.0, CropRect::full(5, 7)).unwrap();
        assert_eq!((out.width(), out.height()), (5, 7));
        // the right-hand column ends up as the top row
        for x in 0..5 {
            assert_eq!(out.get(x, 0), img.get(6, x));
        }
        assert_eq!(out, img.rotate90());
    }

    #[test]
    fn four_quarter_turns_restore() {
        let img = ramp(6, 4);
        let mut cur = img.clone();
        for _ in 0..4 {
            let (w, h) = (cur.height(), cur.width());
            cur = rotate_crop(&cur, 90.0, CropRect::full(w, h)).unwrap();
        }
        assert_eq!(cur, img);
        assert_eq!(img.rotate90().rotate270(), img);
        assert_eq!(img.rotate180().rotate180(), img);
        assert_eq!(rotate(&img, -90.0).unwrap(), img.rotate270());
    }

    #[test]
    fn crop_past_right_edge_fails() {
        let img = ramp(7, 5);
        let err = rotate_crop(&img, 0.0, CropRect::new(1, 0, 7, 5)).unwrap_err();
        assert_eq!(err.kind(), "crop-out-of-bounds");
        assert!(crop(&img, CropRect::new(-1, 0, 2, 2)).is_err());
        assert!(crop(&img, CropRect::new(0, 0, 0, 2)).is_err());
    }

    #[test]
    fn crop_extracts_window() {
        let img = ramp(7, 5);
        let out = crop(&img, CropRect::new(2, 1, 3, 2)).unwrap();
        assert_eq!(out.pixels(), &[img.get(2, 1), img.get(3, 1), img.get(4, 1), img.get(2, 2), img.get(3, 2), img.get(4, 2)]);
    }

    #[test]
    fn oblique_rotation_expands_canvas_and_fills_zero() {
        let img = GrayImage::filled(20, 10, 200).unwrap();
        let out = rotate(&img, 45.0).unwrap();
        // 20·cos45 + 10·sin45 ≈ 21.2
        assert_eq!((out.width(), out.height()), (22, 22));
        assert_eq!(out.get(0, 0), 0);
        assert_eq!(out.get(11, 11), 200);
    }

    #[test]
    fn oblique_rotation_round_trip_is_close_in_the_middle() {
        // gentle gradient: the two canvases differ by half a pixel in registration
        let img = GrayImage::from_fn(41, 41, |x, y| (x + y + 40) as u8).unwrap();
        let back = rotate(&rotate(&img, 30.0).unwrap(), -30.0).unwrap();
        let ox = (back.width() - 41) / 2;
        let oy = (back.height() - 41) / 2;
        let center = crop(&back, CropRect::new(ox as i64, oy as i64, 41, 41)).unwrap();
        for y in 15..26 {
            for x in 15..26 {
                assert!((center.get(x, y) as i32 - img.get(x, y) as i32).abs() <= 2);
            }
        }
    }

    #[test]
    fn png_round_trip() {
        let img = ramp(9, 4);
        assert_eq!(decode_grayscale(&img.to_png()).unwrap(), img);
    }
}
