//! Multi-scale Laplacian-of-Gaussian blob detector and SIFT-style dominant
//! orientation, enough to run the descriptor pipeline on raw images.
//!
//! Responses are `σ² · ∇²(G_σ * I)` on intensities scaled to `[0, 1]`.
//! Extrema are selected on |response|, so bright and dark blobs are treated
//! symmetrically and `c - I` yields the same keypoints as `I`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{gaussian_blur, laplacian, GrayImage, ScalarField};
use crate::keypoint::{normalize_angle, Keypoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub num_scales: usize,
    pub sigma_min: f64,
    /// Ratio between consecutive scales.
    pub sigma_step: f64,
    /// Minimum |response| on `[0, 1]`-scaled intensities.
    pub response_threshold: f64,
    /// Pixels along each image edge that never host an extremum.
    pub border: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            num_scales: 9,
            sigma_min: 1.6,
            sigma_step: 2f64.powf(1.0 / 3.0),
            response_threshold: 0.03,
            border: 4,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_scales < 3 {
            return Err(Error::Input(format!("need at least 3 scales, got {}", self.num_scales)));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min.is_finite()) {
            return Err(Error::Input(format!("sigma_min must be positive, got {}", self.sigma_min)));
        }
        if !(self.sigma_step > 1.0 && self.sigma_step.is_finite()) {
            return Err(Error::Input(format!("sigma_step must exceed 1, got {}", self.sigma_step)));
        }
        if !(self.response_threshold >= 0.0) {
            return Err(Error::Input(format!(
                "response threshold must be non-negative, got {}",
                self.response_threshold
            )));
        }
        Ok(())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.num_scales)
            .map(|k| self.sigma_min * self.sigma_step.powi(k as i32))
            .collect()
    }

    /// Smallest width/height the coarsest smoothing kernel fits into.
    pub fn min_image_side(&self) -> usize {
        let sigma_max = self.sigma_min * self.sigma_step.powi(self.num_scales as i32 - 1);
        2 * (3.0 * sigma_max).ceil() as usize + 1
    }
}

/// Scale-normalized LoG response at one σ.
pub fn log_response(image: &GrayImage, sigma: f64) -> Result<ScalarField> {
    let unit = image.map(|v| v / 255.0);
    let blurred = gaussian_blur(&unit, sigma);
    let lap = laplacian(&blurred)?;
    Ok(lap.scaled(sigma * sigma))
}

/// Detects scale-space extrema of the scale-normalized LoG.
///
/// Output is sorted by descending |response|, ties broken by `y` then `x`.
/// Orientations are left at 0; see [`dominant_orientation`].
pub fn detect_log(image: &GrayImage, params: &DetectorParams) -> Result<Vec<Keypoint>> {
    params.validate()?;
    let min_side = params.min_image_side();
    if image.width() < min_side || image.height() < min_side {
        return Err(Error::Input(format!(
            "image {}x{} too small for largest scale (need {min_side}x{min_side})",
            image.width(),
            image.height()
        )));
    }
    let sigmas = params.sigmas();
    let responses: Vec<ScalarField> = sigmas
        .par_iter()
        .map(|&s| log_response(image, s))
        .collect::<Result<_>>()?;

    let (w, h) = (image.width(), image.height());
    let margin = params.border.max(1);
    if w <= 2 * margin || h <= 2 * margin {
        return Ok(Vec::new());
    }
    let mut keypoints: Vec<Keypoint> = (1..sigmas.len() - 1)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut found = Vec::new();
            let below = &responses[k - 1];
            let here = &responses[k];
            let above = &responses[k + 1];
            for y in margin..h - margin {
                for x in margin..w - margin {
                    let v = here.get(x, y);
                    if v.abs() <= params.response_threshold {
                        continue;
                    }
                    if !is_strict_extremum(v, x, y, [below, here, above]) {
                        continue;
                    }
                    let (ox, oy) = subpixel_offset(here, x, y);
                    found.push(
                        Keypoint::new(x as f64 + ox, y as f64 + oy, sigmas[k], 0.0).with_response(v),
                    );
                }
            }
            found
        })
        .collect();
    keypoints.sort_by(|a, b| {
        b.response
            .abs()
            .total_cmp(&a.response.abs())
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    Ok(keypoints)
}

fn is_strict_extremum(v: f64, x: usize, y: usize, stack: [&ScalarField; 3]) -> bool {
    let is_max = v > 0.0;
    for (layer, field) in stack.iter().enumerate() {
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if layer == 1 && nx == x && ny == y {
                    continue;
                }
                let n = field.get(nx, ny);
                if (is_max && n >= v) || (!is_max && n <= v) {
                    return false;
                }
            }
        }
    }
    true
}

/// Vertex of the 1-D parabola through three samples, per axis, clamped to ±0.5.
fn subpixel_offset(field: &ScalarField, x: usize, y: usize) -> (f64, f64) {
    let c = field.get(x, y);
    let fit = |lo: f64, hi: f64| {
        let curvature = lo - 2.0 * c + hi;
        if curvature == 0.0 {
            0.0
        } else {
            (-(hi - lo) / (2.0 * curvature)).clamp(-0.5, 0.5)
        }
    };
    (
        fit(field.get(x - 1, y), field.get(x + 1, y)),
        fit(field.get(x, y - 1), field.get(x, y + 1)),
    )
}

pub const ORIENTATION_BINS: usize = 36;

/// Result of [`dominant_orientation`]. `degenerate` is set when the
/// neighbourhood has no gradient at all, in which case `angle` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub angle: f64,
    pub degenerate: bool,
}

/// Gradient-orientation histogram around the keypoint, Gaussian weighted with σ = 1.5 · scale.
///
/// Bin `k` is centred on `k · 10°`. The histogram is smoothed circularly
/// before the peak is picked; ties go to the lowest bin.
pub fn orientation_histogram(image: &GrayImage, keypoint: &Keypoint) -> Result<[f64; ORIENTATION_BINS]> {
    if !keypoint.is_finite() || keypoint.scale <= 0.0 {
        return Err(Error::Input(format!("invalid keypoint {keypoint:?}")));
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
    if image.width() < 3 || image.height() < 3 {
        return Err(Error::Dimension("orientation needs at least a 3x3 image".into()));
    }
    let sigma = 1.5 * keypoint.scale;
    let radius = (3.0 * sigma).ceil();
    let x_lo = (keypoint.x - radius).ceil().max(0.0) as usize;
    let x_hi = (keypoint.x + radius).floor().min((image.width() - 1) as f64) as usize;
    let y_lo = (keypoint.y - radius).ceil().max(0.0) as usize;
    let y_hi = (keypoint.y + radius).floor().min((image.height() - 1) as f64) as usize;
    let (w, h) = (image.width(), image.height());
    let diff = |lo: f64, c: f64, hi: f64, at: usize, len: usize| {
        if at == 0 {
            hi - c
        } else if at + 1 == len {
            c - lo
        } else {
            (hi - lo) * 0.5
        }
    };

    let mut hist = [0.0; ORIENTATION_BINS];
    for y in y_lo..=y_hi {
        let dy = y as f64 - keypoint.y;
        for x in x_lo..=x_hi {
            let dx = x as f64 - keypoint.x;
            let r2 = dx * dx + dy * dy;
            if r2 > radius * radius {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            let c = image.get(x, y);
            let gx = diff(image.get_clamped(xi - 1, yi), c, image.get_clamped(xi + 1, yi), x, w);
            let gy = diff(image.get_clamped(xi, yi - 1), c, image.get_clamped(xi, yi + 1), y, h);
            let magnitude = gx.hypot(gy);
            if magnitude == 0.0 {
                continue;
            }
            let angle = normalize_angle(gy.atan2(gx));
            let bin = (angle * ORIENTATION_BINS as f64 / TAU).round() as usize % ORIENTATION_BINS;
            hist[bin] += magnitude * (-r2 / (2.0 * sigma * sigma)).exp();
        }
    }
    for _ in 0..2 {
        let prev = hist;
        for (k, v) in hist.iter_mut().enumerate() {
            let l = prev[(k + ORIENTATION_BINS - 1) % ORIENTATION_BINS];
            let r = prev[(k + 1) % ORIENTATION_BINS];
            *v = 0.25 * l + 0.5 * prev[k] + 0.25 * r;
        }
    }
    Ok(hist)
}

/// Dominant gradient orientation in `[0, 2π)` with parabolic peak refinement.
pub fn dominant_orientation(image: &GrayImage, keypoint: &Keypoint) -> Result<Orientation> {
    let hist = orientation_histogram(image, keypoint)?;
    let mut peak = 0;
    for (k, &v) in hist.iter().enumerate() {
        if v > hist[peak] {
            peak = k;
        }
    }
    if !(hist[peak] > 0.0) {
        return Ok(Orientation {
            angle: 0.0,
            degenerate: true,
        });
    }
    let l = hist[(peak + ORIENTATION_BINS - 1) % ORIENTATION_BINS];
    let r = hist[(peak + 1) % ORIENTATION_BINS];
    let curvature = l - 2.0 * hist[peak] + r;
    let offset = if curvature < 0.0 {
        (0.5 * (l - r) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok(Orientation {
        angle: normalize_angle((peak as f64 + offset) * TAU / ORIENTATION_BINS as f64),
        degenerate: false,
    })
}

/// Returns the keypoints with their orientation replaced by the dominant one.
pub fn assign_orientations(image: &GrayImage, keypoints: &[Keypoint]) -> Result<Vec<Keypoint>> {
    keypoints
        .par_iter()
        .map(|kp| Ok(kp.with_orientation(dominant_orientation(image, kp)?.angle)))
        .collect()
}
