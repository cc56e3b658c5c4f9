use std::f64::consts::TAU;

use crate::image::VectorField;
use crate::keypoint::normalize_angle;

pub const GRID_SIDE: usize = 4;
pub const NUM_BINS: usize = 8;
pub const NUM_CELLS: usize = GRID_SIDE * GRID_SIDE;
pub const DESCRIPTOR_LEN: usize = NUM_CELLS * NUM_BINS;

/// 4×4 spatial cells (row-major) of 8-bin orientation histograms.
///
/// Bin `o` is centred on angle `o · 45°`, angles measured with `atan2(vy, vx)` in
/// patch coordinates (x right, y down).
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    cells: [[f64; NUM_BINS]; NUM_CELLS],
}

impl Default for HistogramGrid {
    fn default() -> Self {
        Self::zeros()
    }
}

impl HistogramGrid {
    pub fn zeros() -> Self {
        Self {
            cells: [[0.0; NUM_BINS]; NUM_CELLS],
        }
    }

    /// Builds a grid from a flat cell-major, bin-minor slice of 128 values.
    pub fn from_flat(values: &[f64]) -> Option<Self> {
        if values.len() != DESCRIPTOR_LEN {
            return None;
        }
        let mut grid = Self::zeros();
        for (i, v) in values.iter().enumerate() {
            grid.cells[i / NUM_BINS][i % NUM_BINS] = *v;
        }
        Some(grid)
    }

    pub fn get(&self, row: usize, col: usize, bin: usize) -> f64 {
        self.cells[row * GRID_SIDE + col][bin]
    }

    pub fn set(&mut self, row: usize, col: usize, bin: usize, value: f64) {
        self.cells[row * GRID_SIDE + col][bin] = value;
    }

    pub fn cell(&self, index: usize) -> &[f64; NUM_BINS] {
        &self.cells[index]
    }

    pub fn cells(&self) -> &[[f64; NUM_BINS]; NUM_CELLS] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [[f64; NUM_BINS]; NUM_CELLS] {
        &mut self.cells
    }

    /// Cell-major, bin-minor flattening: index `(row · 4 + col) · 8 + bin`.
    pub fn flatten(&self) -> Vec<f64> {
        self.cells.iter().flatten().copied().collect()
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().flatten().sum()
    }
}

/// Spatial window weight at patch pixel `(i, j)`; Gaussian with σ = side / 2.
pub(crate) fn spatial_weight(side: usize, i: usize, j: usize) -> f64 {
    let centre = (side - 1) as f64 / 2.0;
    let sigma = side as f64 / 2.0;
    let dx = i as f64 - centre;
    let dy = j as f64 - centre;
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Lower orientation bin and the fraction that spills into the next bin.
#[inline]
pub(crate) fn orientation_bin(vx: f64, vy: f64) -> (usize, f64) {
    let position = normalize_angle(vy.atan2(vx)) * NUM_BINS as f64 / TAU;
    let lower = position.floor();
    ((lower as usize) % NUM_BINS, position - lower)
}

/// Continuous cell coordinate of pixel `index`, clamped so border pixels keep all their mass.
#[inline]
fn cell_coordinate(side: usize, index: usize) -> (usize, f64) {
    let c = ((index as f64 + 0.5) * GRID_SIDE as f64 / side as f64 - 0.5)
        .clamp(0.0, (GRID_SIDE - 1) as f64);
    let lower = (c.floor() as usize).min(GRID_SIDE - 2);
    (lower, c - lower as f64)
}

/// Soft-bins a square vector field into the 4×4×8 grid.
///
/// Each pixel contributes `|v| · window(x)`, split linearly between the two
/// nearest orientation bins and bilinearly between the nearest cells. The
/// split weights sum to one, so total grid mass equals the total pixel weight.
pub fn accumulate_grid(field: &VectorField) -> HistogramGrid {
    let side = field.width();
    debug_assert_eq!(side, field.height());
    let mut grid = HistogramGrid::zeros();
    let cells = grid.cells_mut();
    for j in 0..side {
        let (row0, fy) = cell_coordinate(side, j);
        for i in 0..side {
            let [vx, vy] = field.get(i, j);
            let magnitude = vx.hypot(vy);
            if magnitude == 0.0 {
                continue;
            }
            let weight = magnitude * spatial_weight(side, i, j);
            let (col0, fx) = cell_coordinate(side, i);
            let (bin0, fo) = orientation_bin(vx, vy);
            let bin1 = (bin0 + 1) % NUM_BINS;
            for (row, wy) in [(row0, 1.0 - fy), (row0 + 1, fy)] {
                for (col, wx) in [(col0, 1.0 - fx), (col0 + 1, fx)] {
                    let w = weight * wy * wx;
                    let cell = &mut cells[row * GRID_SIDE + col];
                    cell[bin0] += w * (1.0 - fo);
                    cell[bin1] += w * fo;
                }
            }
        }
    }
    grid
}

/// Single 8-bin soft orientation histogram over the whole windowed field.
pub fn accumulate_orientation_histogram(field: &VectorField) -> [f64; NUM_BINS] {
    let side = field.width();
    let mut hist = [0.0; NUM_BINS];
    for j in 0..field.height() {
        for i in 0..side {
            let [vx, vy] = field.get(i, j);
            let magnitude = vx.hypot(vy);
            if magnitude == 0.0 {
                continue;
            }
            let weight = magnitude * spatial_weight(side, i, j);
            let (bin0, fo) = orientation_bin(vx, vy);
            hist[bin0] += weight * (1.0 - fo);
            hist[(bin0 + 1) % NUM_BINS] += weight * fo;
        }
    }
    hist
}

/// Σ over pixels of `|v| · window(x)`, the mass [`accumulate_grid`] must conserve.
pub fn total_weight(field: &VectorField) -> f64 {
    let side = field.width();
    let mut total = 0.0;
    for j in 0..field.height() {
        for i in 0..side {
            let [vx, vy] = field.get(i, j);
            total += vx.hypot(vy) * spatial_weight(side, i, j);
        }
    }
    total
}
