//! DCI descriptor pipeline and the histogram-of-gradients baseline.
//!
//! DCI: patch → gradient → Laplace gradient → soft-binned 4×4×8 histogram
//! weighted by the Laplace-gradient magnitude → divergence sign flip →
//! L1 normalization → element-wise square root.

mod flip;
mod histogram;
mod stats;

use rayon::prelude::*;

pub use self::flip::{canonical_flip, divergence_phi, divergence_phi_flux, FlipMode};
pub use self::histogram::{
    accumulate_grid, accumulate_orientation_histogram, total_weight, HistogramGrid,
    DESCRIPTOR_LEN, GRID_SIDE, NUM_BINS,
};
pub use self::stats::{mean_histograms, MeanHistograms};

use crate::error::{Error, Result};
use crate::image::{gradient, laplace_of_field, GrayImage};
use crate::keypoint::Keypoint;
use crate::patch::{extract_patch, Patch, DEFAULT_MAGNIFICATION, DEFAULT_PATCH_SIDE};

/// Histogram mass below which a patch is treated as flat.
pub const DEGENERATE_EPSILON: f64 = 1e-12;

/// Per-value clamp applied by the gradient baseline after its first L2 normalization.
pub const HOG_TRUNCATION: f64 = 0.2;

/// Smallest patch side that gives every cell at least 2×2 pixels.
pub const MIN_GRID_SIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorParams {
    pub side: usize,
    pub magnification: f64,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        Self {
            side: DEFAULT_PATCH_SIDE,
            magnification: DEFAULT_MAGNIFICATION,
        }
    }
}

impl DescriptorParams {
    pub fn validate(&self) -> Result<()> {
        if self.side < MIN_GRID_SIDE + 1 || self.side.is_multiple_of(2) {
            return Err(Error::Input(format!(
                "patch side must be odd and > {MIN_GRID_SIDE}, got {}",
                self.side
            )));
        }
        if !(self.magnification > 0.0 && self.magnification.is_finite()) {
            return Err(Error::Input(format!(
                "magnification must be positive, got {}",
                self.magnification
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DescriptorKind {
    Dci,
    Hog,
}

impl DescriptorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptorKind::Dci => "dci",
            DescriptorKind::Hog => "hog",
        }
    }
}

impl std::str::FromStr for DescriptorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dci" => Ok(DescriptorKind::Dci),
            "hog" => Ok(DescriptorKind::Hog),
            other => Err(format!("unknown descriptor kind {other:?} (expected dci|hog)")),
        }
    }
}

impl std::fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 128-value descriptor. Degenerate descriptors (flat patches) are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: Vec<f64>,
    degenerate: bool,
}

impl Descriptor {
    pub fn degenerate() -> Self {
        Self {
            values: vec![0.0; DESCRIPTOR_LEN],
            degenerate: true,
        }
    }

    /// Wraps stored values; an all-zero vector is read back as degenerate.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != DESCRIPTOR_LEN {
            return Err(Error::Dimension(format!(
                "descriptor needs {DESCRIPTOR_LEN} values, got {}",
                values.len()
            )));
        }
        let degenerate = values.iter().all(|&v| v == 0.0);
        Ok(Self { values, degenerate })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Descriptor) -> f64 {
        squared_distance(&self.values, &other.values).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Descriptor) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_grid_side(patch: &Patch) -> Result<()> {
    if patch.side() < MIN_GRID_SIDE {
        return Err(Error::Input(format!(
            "patch side {} too small for a 4x4 grid (need >= {MIN_GRID_SIDE})",
            patch.side()
        )));
    }
    Ok(())
}

/// Histogram of Laplace gradient over the 4×4 cells of `patch`.
pub fn build_holg(patch: &Patch) -> Result<HistogramGrid> {
    check_grid_side(patch)?;
    let g = gradient(&patch.to_image())?;
    let d = laplace_of_field(&g)?;
    Ok(accumulate_grid(&d))
}

/// Histogram of first-order gradients, the baseline's analogue of [`build_holg`].
pub fn build_hog(patch: &Patch) -> Result<HistogramGrid> {
    check_grid_side(patch)?;
    Ok(accumulate_grid(&gradient(&patch.to_image())?))
}

/// L1-normalizes the flattened grid and takes the element-wise square root.
pub fn finalize(grid: &HistogramGrid) -> Result<Descriptor> {
    let flat = grid.flatten();
    if let Some((i, v)) = flat.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Invariant(format!("histogram bin {i} is {v}")));
    }
    let total: f64 = flat.iter().sum();
    if total < DEGENERATE_EPSILON {
        return Ok(Descriptor::degenerate());
    }
    Ok(Descriptor {
        values: flat.iter().map(|h| (h / total).sqrt()).collect(),
        degenerate: false,
    })
}

/// SIFT-style post-processing: L2 normalize, clamp at 0.2, L2 normalize again.
fn finalize_hog(grid: &HistogramGrid) -> Descriptor {
    let mut values = grid.flatten();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if grid.total() < DEGENERATE_EPSILON || norm == 0.0 {
        return Descriptor::degenerate();
    }
    for v in &mut values {
        *v = (*v / norm).min(HOG_TRUNCATION);
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    values.iter_mut().for_each(|v| *v /= norm);
    Descriptor {
        values,
        degenerate: false,
    }
}

/// Keypoint with the orientation the given mode samples at.
fn aligned(keypoint: &Keypoint, mode: FlipMode) -> Keypoint {
    match mode {
        FlipMode::Upright => keypoint.with_orientation(0.0),
        FlipMode::Oriented => *keypoint,
    }
}

fn sample_patch(
    image: &GrayImage,
    keypoint: &Keypoint,
    mode: FlipMode,
    params: &DescriptorParams,
) -> Result<Patch> {
    params.validate()?;
    if !keypoint.is_finite() {
        return Err(Error::Input(format!("non-finite keypoint {keypoint:?}")));
    }
    if !image.contains(keypoint.x, keypoint.y) {
        return Err(Error::Input(format!(
            "keypoint ({}, {}) outside {}x{} image",
            keypoint.x,
            keypoint.y,
            image.width(),
            image.height()
        )));
    }
    extract_patch(image, &aligned(keypoint, mode), params.side, params.magnification)
}

/// Computes the DCI descriptor of one keypoint.
///
/// In `Upright` mode the keypoint orientation is ignored (forced to 0); in
/// `Oriented` mode the patch is aligned with `keypoint.orientation`.
pub fn describe(
    image: &GrayImage,
    keypoint: &Keypoint,
    mode: FlipMode,
    params: &DescriptorParams,
) -> Result<Descriptor> {
    let patch = sample_patch(image, keypoint, mode, params)?;
    describe_patch(&patch, mode)
}

/// DCI pipeline on an already-sampled patch.
pub fn describe_patch(patch: &Patch, mode: FlipMode) -> Result<Descriptor> {
    let grid = build_holg(patch)?;
    let phi = divergence_phi(patch);
    finalize(&canonical_flip(&grid, phi, mode))
}

/// Gradient-histogram baseline: same sampling and binning as [`describe`], but
/// first-order gradients, no flip, and L2 / clamp / L2 post-processing.
pub fn describe_hog_baseline(
    image: &GrayImage,
    keypoint: &Keypoint,
    mode: FlipMode,
    params: &DescriptorParams,
) -> Result<Descriptor> {
    let patch = sample_patch(image, keypoint, mode, params)?;
    Ok(finalize_hog(&build_hog(&patch)?))
}

pub fn describe_with(
    kind: DescriptorKind,
    image: &GrayImage,
    keypoint: &Keypoint,
    mode: FlipMode,
    params: &DescriptorParams,
) -> Result<Descriptor> {
    match kind {
        DescriptorKind::Dci => describe(image, keypoint, mode, params),
        DescriptorKind::Hog => describe_hog_baseline(image, keypoint, mode, params),
    }
}

/// Describes every keypoint in parallel; results keep the input order.
pub fn describe_many(
    kind: DescriptorKind,
    image: &GrayImage,
    keypoints: &[Keypoint],
    mode: FlipMode,
    params: &DescriptorParams,
) -> Vec<Result<Descriptor>> {
    keypoints
        .par_iter()
        .map(|kp| describe_with(kind, image, kp, mode, params))
        .collect()
}
