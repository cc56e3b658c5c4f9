//! Divergence-based bright/dark canonicalization.
//!
//! Inverting contrast negates the gradient field, so the integrated divergence
//! of the gradient (the patch Laplacian) changes sign. Patches with negative
//! divergence (bright centres, converging gradients) are permuted into the
//! order an inverted copy would produce, which makes `I` and `c - I` land on
//! the same descriptor.

use super::histogram::{HistogramGrid, GRID_SIDE, NUM_BINS};
use crate::image::{laplacian, region_boundary_flux, Rect};
use crate::patch::Patch;

/// How the flip permutation acts on the grid; must match how the patch was aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlipMode {
    /// Patch sampled at orientation 0. Inversion turns every vector by π, so
    /// each cell's bins rotate by four.
    Upright,
    /// Patch aligned with a re-estimated dominant orientation. Inversion turns
    /// that orientation by π as well, so the cells rotate by 180° instead.
    Oriented,
}

impl FlipMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlipMode::Upright => "upright",
            FlipMode::Oriented => "oriented",
        }
    }
}

impl std::str::FromStr for FlipMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "upright" => Ok(FlipMode::Upright),
            "oriented" => Ok(FlipMode::Oriented),
            other => Err(format!("unknown flip mode {other:?} (expected upright|oriented)")),
        }
    }
}

impl std::fmt::Display for FlipMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn interior(patch: &Patch) -> Rect {
    let side = patch.side();
    Rect::new(1, 1, side - 2, side - 2)
}

/// Integrated divergence Φ: the discrete Laplacian summed over the patch interior.
///
/// The outermost ring only serves as stencil support; including it would make
/// the sum vanish identically under replicate borders. Bright blobs give Φ < 0.
pub fn divergence_phi(patch: &Patch) -> f64 {
    let lap = laplacian(&patch.to_image()).expect("patch side is at least 3");
    lap.sum_over(interior(patch))
}

/// Φ computed as the outward flux of the gradient through the interior boundary.
///
/// Agrees with [`divergence_phi`] up to floating-point rounding.
pub fn divergence_phi_flux(patch: &Patch) -> f64 {
    region_boundary_flux(&patch.to_image(), interior(patch)).expect("patch side is at least 3")
}

/// Applies the flip permutation when `phi < 0`; returns the grid unchanged otherwise.
pub fn canonical_flip(grid: &HistogramGrid, phi: f64, mode: FlipMode) -> HistogramGrid {
    if !(phi < 0.0) {
        return grid.clone();
    }
    let mut out = HistogramGrid::zeros();
    for row in 0..GRID_SIDE {
        for col in 0..GRID_SIDE {
            for bin in 0..NUM_BINS {
                let v = grid.get(row, col, bin);
                match mode {
                    FlipMode::Upright => out.set(row, col, (bin + NUM_BINS / 2) % NUM_BINS, v),
                    FlipMode::Oriented => {
                        out.set(GRID_SIDE - 1 - row, GRID_SIDE - 1 - col, bin, v)
                    }
                }
            }
        }
    }
    out
}
