//! Directional motion as an image: one row per bone, one column per frame,
//! and the x, y, z direction components carried by the red, blue and green
//! channels respectively. Components map affinely `v ↦ (v + 1) / 2`, so unit
//! vectors land in `[0, 1]` without clamping or quantization.

use crate::motion::DirectionalMotion;
use crate::{Error, Result};

/// Direction axis stored in each RGB channel: R ← x, G ← z, B ← y.
pub const CHANNEL_AXIS: [usize; 3] = [0, 2, 1];

/// `H × W × 3` reals in `[0, 1]`, with `H` = bones and `W` = frames.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionImage {
    height: usize,
    width: usize,
    /// Row-major `[row][col][channel]`.
    pixels: Vec<f64>,
}

impl MotionImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width * 3 {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {height}×{width}×3 image",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(MotionImage {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Flattened row-major pixel data, the embedder's input vector.
    pub fn as_slice(&self) -> &[f64] {
        &self.pixels
    }

    /// 8-bit RGB rendering for inspection only; lossy.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels.iter().map(|v| (v * 255.0).round() as u8).collect()
    }
}

pub fn to_image(dm: &DirectionalMotion) -> MotionImage {
    let (h, w) = (dm.bones(), dm.frames());
    let mut pixels = vec![0.0; h * w * 3];
    for f in 0..w {
        for b in 0..h {
            let v = dm.vector(f, b);
            let px = &mut pixels[(b * w + f) * 3..(b * w + f) * 3 + 3];
            for (c, &axis) in CHANNEL_AXIS.iter().enumerate() {
                px[c] = (v[axis] + 1.0) * 0.5;
            }
        }
    }
    debug_assert!(pixels.iter().all(|v| (0.0..=1.0).contains(v)));
    MotionImage {
        height: h,
        width: w,
        pixels,
    }
}

/// Inverse of [`to_image`]; vectors are not renormalized.
pub fn from_image(img: &MotionImage) -> DirectionalMotion {
    let (h, w) = (img.height, img.width);
    let mut vectors = vec![[0.0; 3]; h * w];
    for b in 0..h {
        for f in 0..w {
            let px = img.pixel(b, f);
            let v = &mut vectors[f * h + b];
            for (c, &axis) in CHANNEL_AXIS.iter().enumerate() {
                v[axis] = 2.0 * px[c] - 1.0;
            }
        }
    }
    DirectionalMotion::new(w, h, vectors).expect("image dimensions are non-zero")
}
