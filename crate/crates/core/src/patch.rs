//! Rotated, scale-normalized square patches sampled around keypoints.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::keypoint::Keypoint;

pub const DEFAULT_PATCH_SIDE: usize = 31;
pub const DEFAULT_MAGNIFICATION: f64 = 3.0;

/// Square resampled neighbourhood of a keypoint. `side` is always odd.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    side: usize,
    pixels: Vec<f64>,
    source_keypoint: Keypoint,
}

impl Patch {
    /// Wraps raw samples as a patch; used for synthetic patches in tests and examples.
    pub fn from_pixels(side: usize, pixels: Vec<f64>, source_keypoint: Keypoint) -> Result<Self> {
        if side < 3 || side.is_multiple_of(2) {
            return Err(Error::Input(format!("patch side must be odd and >= 3, got {side}")));
        }
        if pixels.len() != side * side {
            return Err(Error::Dimension(format!(
                "{} samples supplied for a {side}x{side} patch",
                pixels.len()
            )));
        }
        Ok(Self {
            side,
            pixels,
            source_keypoint,
        })
    }

    pub fn from_fn(side: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let img = GrayImage::from_fn(side, side, f);
        Self::from_pixels(side, img.into_pixels(), Keypoint::new(0.0, 0.0, 1.0, 0.0))
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn source_keypoint(&self) -> &Keypoint {
        &self.source_keypoint
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.side + x]
    }

    /// Views the patch as an image so the raster operators apply to it.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(self.side, self.side, self.pixels.clone()).expect("patch is square")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            side: self.side,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
            source_keypoint: self.source_keypoint,
        }
    }
}

/// Samples a `side × side` grid spanning `±magnification · scale` around the keypoint,
/// rotated so the patch x-axis points along `keypoint.orientation`.
///
/// Sample `(i, j)` sits at offset `(u, v) = ((i - c) s, (j - c) s)` with
/// `c = (side - 1) / 2` and `s = 2 · magnification · scale / (side - 1)`, mapped
/// to the image as `(x + u cos θ - v sin θ, y + u sin θ + v cos θ)`.
pub fn extract_patch(
    image: &GrayImage,
    keypoint: &Keypoint,
    side: usize,
    magnification: f64,
) -> Result<Patch> {
    if side < 3 || side.is_multiple_of(2) {
        return Err(Error::Input(format!("patch side must be odd and >= 3, got {side}")));
    }
    if !keypoint.is_finite() {
        return Err(Error::Input(format!("non-finite keypoint {keypoint:?}")));
    }
    if keypoint.scale <= 0.0 {
        return Err(Error::Input(format!("keypoint scale must be positive, got {}", keypoint.scale)));
    }
    if !(magnification > 0.0 && magnification.is_finite()) {
        return Err(Error::Input(format!("magnification must be positive, got {magnification}")));
    }
    let centre = (side - 1) as f64 / 2.0;
    let spacing = 2.0 * magnification * keypoint.scale / (side - 1) as f64;
    let (sin, cos) = keypoint.orientation.sin_cos();
    let mut pixels = Vec::with_capacity(side * side);
    for j in 0..side {
        let v = (j as f64 - centre) * spacing;
        for i in 0..side {
            let u = (i as f64 - centre) * spacing;
            let x = keypoint.x + u * cos - v * sin;
            let y = keypoint.y + u * sin + v * cos;
            pixels.push(image.bilinear(x, y));
        }
    }
    Ok(Patch {
        side,
        pixels,
        source_keypoint: *keypoint,
    })
}
