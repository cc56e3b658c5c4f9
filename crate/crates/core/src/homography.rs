use crate::error::{Error, Result};

/// Planar projective map between two images, row-major 3×3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Input("homography has non-finite entries".into()));
        }
        let h = Self { m };
        if h.determinant().abs() <= 1e-12 {
            return Err(Error::Input(format!("singular homography (det {})", h.determinant())));
        }
        Ok(h)
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Ground truth for [`GrayImage::rotate90`](crate::GrayImage::rotate90) of a `width × height` image.
    pub fn rotate90(_width: usize, height: usize) -> Self {
        Self {
            m: [[0.0, -1.0, (height - 1) as f64], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Ground truth for [`GrayImage::rotate180`](crate::GrayImage::rotate180).
    pub fn rotate180(width: usize, height: usize) -> Self {
        Self {
            m: [
                [-1.0, 0.0, (width - 1) as f64],
                [0.0, -1.0, (height - 1) as f64],
                [0.0, 0.0, 1.0],
            ],
        }
    }

    /// `x -> scale · R(angle) · x + (tx, ty)`.
    pub fn similarity(scale: f64, angle: f64, tx: f64, ty: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new([
            [scale * c, -scale * s, tx],
            [scale * s, scale * c, ty],
            [0.0, 0.0, 1.0],
        ])
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        let det = self.determinant();
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Self {
            m: adj.map(|row| row.map(|v| v / det)),
        }
    }

    /// Homogeneous image of `(x, y)`: `(x', y', w)` before division.
    #[inline]
    pub fn apply_homogeneous(&self, x: f64, y: f64) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * x + m[0][1] * y + m[0][2],
            m[1][0] * x + m[1][1] * y + m[1][2],
            m[2][0] * x + m[2][1] * y + m[2][2],
        ]
    }

    /// Maps a point; fails when it lands on or behind the plane at infinity (`w <= 0`).
    pub fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let [u, v, w] = self.apply_homogeneous(x, y);
        if w <= 0.0 {
            return Err(Error::BehindPlane);
        }
        Ok((u / w, v / w))
    }
}
