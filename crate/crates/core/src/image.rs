//! Rasters and the discrete differential operators the descriptor is built on.
//!
//! Every operator returns a field with the same dimensions as its input.
//! Second-order stencils use replicate (clamp-to-edge) border extension; the
//! gradient uses one-sided differences on the outermost pixels.

use crate::error::{Error, Result};

/// Smallest width/height any derivative operator accepts.
pub const MIN_DERIVATIVE_SIZE: usize = 3;

/// Single-channel raster with real-valued, row-major intensities.
///
/// Intensities are nominally in `[0, 255]` but nothing enforces that range.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.pixels[y * self.width + x] = value;
    }

    /// Pixel lookup with replicate-border extension.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    /// Bilinear interpolation at a real-valued position; positions outside the
    /// raster are clamped to the border, which is the same as replicate extension.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    /// Applies `f` to every intensity, e.g. `image.map(|v| 255.0 - v)` for contrast inversion.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rotates the raster by 90° clockwise: source `(x, y)` lands at `(h - 1 - y, x)`.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |nx, ny| self.get(ny, h - 1 - nx))
    }

    /// Rotates the raster by 180°: source `(x, y)` lands at `(w - 1 - x, h - 1 - y)`.
    pub fn rotate180(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(w, h, |nx, ny| self.get(w - 1 - nx, h - 1 - ny))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64
    }

    fn check_derivative_size(&self) -> Result<()> {
        check_size(self.width, self.height)
    }
}

fn check_size(width: usize, height: usize) -> Result<()> {
    if width < MIN_DERIVATIVE_SIZE || height < MIN_DERIVATIVE_SIZE {
        return Err(Error::Dimension(format!(
            "derivative operators need at least {MIN_DERIVATIVE_SIZE}x{MIN_DERIVATIVE_SIZE}, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Per-pixel 2-vector grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    vectors: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, vectors: Vec<[f64; 2]>) -> Result<Self> {
        if vectors.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} vectors supplied for a {width}x{height} field",
                vectors.len()
            )));
        }
        Ok(Self {
            width,
            height,
            vectors,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 2]) -> Self {
        let mut vectors = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                vectors.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            vectors,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 2] {
        self.vectors[y * self.width + x]
    }

    #[inline]
    fn get_clamped(&self, x: isize, y: isize) -> [f64; 2] {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.vectors[cy * self.width + cx]
    }

    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            vectors: self.vectors.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Per-pixel scalar grid, e.g. the Laplacian response.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Sum of values over `rect`, accumulated row by row.
    pub fn sum_over(&self, rect: Rect) -> f64 {
        let mut total = 0.0;
        for y in rect.y..rect.y + rect.height {
            for x in rect.x..rect.x + rect.width {
                total += self.get(x, y);
            }
        }
        total
    }
}

/// Axis-aligned pixel rectangle `[x, x + width) × [y, y + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.width == 0
            || self.height == 0
            || self.x + self.width > width
            || self.y + self.height > height
        {
            return Err(Error::Input(format!(
                "rectangle {self:?} does not fit a {width}x{height} raster"
            )));
        }
        Ok(())
    }
}

/// Image gradient by central differences `(I(x+1) - I(x-1)) / 2`.
///
/// Border pixels fall back to the one-sided difference toward the interior,
/// so linear ramps have an exactly constant gradient everywhere.
pub fn gradient(image: &GrayImage) -> Result<VectorField> {
    image.check_derivative_size()?;
    let (w, h) = (image.width, image.height);
    let derivative = |lo: f64, centre: f64, hi: f64, at: usize, len: usize| {
        if at == 0 {
            hi - centre
        } else if at + 1 == len {
            centre - lo
        } else {
            (hi - lo) * 0.5
        }
    };
    Ok(VectorField::from_fn(w, h, |x, y| {
        let (xi, yi) = (x as isize, y as isize);
        let centre = image.get(x, y);
        [
            derivative(image.get_clamped(xi - 1, yi), centre, image.get_clamped(xi + 1, yi), x, w),
            derivative(image.get_clamped(xi, yi - 1), centre, image.get_clamped(xi, yi + 1), y, h),
        ]
    }))
}

/// Five-point discrete Laplacian `I(x1) + I(x2) + I(x3) + I(x4) - 4 I(x)`.
///
/// This is the conventional sign: a bright blob has a negative response at its centre.
pub fn laplacian(image: &GrayImage) -> Result<ScalarField> {
    image.check_derivative_size()?;
    let mut values = Vec::with_capacity(image.width * image.height);
    for y in 0..image.height as isize {
        for x in 0..image.width as isize {
            let centre = image.get_clamped(x, y);
            let neighbours = image.get_clamped(x - 1, y)
                + image.get_clamped(x + 1, y)
                + image.get_clamped(x, y - 1)
                + image.get_clamped(x, y + 1);
            values.push(neighbours - 4.0 * centre);
        }
    }
    Ok(ScalarField {
        width: image.width,
        height: image.height,
        values,
    })
}

/// Laplace gradient `d(x) = g(x) - (g(x1) + g(x2) + g(x3) + g(x4)) / 4`, per component.
pub fn laplace_of_field(field: &VectorField) -> Result<VectorField> {
    check_size(field.width, field.height)?;
    Ok(VectorField::from_fn(field.width, field.height, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let c = field.get_clamped(x, y);
        let l = field.get_clamped(x - 1, y);
        let r = field.get_clamped(x + 1, y);
        let u = field.get_clamped(x, y - 1);
        let d = field.get_clamped(x, y + 1);
        [
            c[0] - 0.25 * (l[0] + r[0] + u[0] + d[0]),
            c[1] - 0.25 * (l[1] + r[1] + u[1] + d[1]),
        ]
    }))
}

/// Sum of the discrete Laplacian over `rect`.
pub fn region_laplacian_sum(image: &GrayImage, rect: Rect) -> Result<f64> {
    rect.check_within(image.width, image.height)?;
    Ok(laplacian(image)?.sum_over(rect))
}

/// Net outward first-difference flux through the boundary of `rect`.
///
/// Every 4-neighbour edge that leaves the rectangle contributes
/// `I(outside) - I(inside)`. Interior edges of the Laplacian sum cancel
/// pairwise, so this equals [`region_laplacian_sum`] up to rounding.
pub fn region_boundary_flux(image: &GrayImage, rect: Rect) -> Result<f64> {
    image.check_derivative_size()?;
    rect.check_within(image.width, image.height)?;
    let x0 = rect.x as isize;
    let y0 = rect.y as isize;
    let x1 = (rect.x + rect.width - 1) as isize;
    let y1 = (rect.y + rect.height - 1) as isize;
    let mut flux = 0.0;
    // left and right sides
    for y in y0..=y1 {
        flux += image.get_clamped(x0 - 1, y) - image.get_clamped(x0, y);
        flux += image.get_clamped(x1 + 1, y) - image.get_clamped(x1, y);
    }
    // top and bottom sides
    for x in x0..=x1 {
        flux += image.get_clamped(x, y0 - 1) - image.get_clamped(x, y0);
        flux += image.get_clamped(x, y1 + 1) - image.get_clamped(x, y1);
    }
    Ok(flux)
}

/// Normalized 1-D Gaussian taps with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

/// Separable Gaussian smoothing with replicate borders.
pub fn gaussian_blur(image: &GrayImage, sigma: f64) -> GrayImage {
    let taps = gaussian_kernel(sigma);
    let radius = (taps.len() / 2) as isize;
    let (w, h) = (image.width, image.height);
    let horizontal = GrayImage::from_fn(w, h, |x, y| {
        taps.iter()
            .enumerate()
            .map(|(k, t)| t * image.get_clamped(x as isize + k as isize - radius, y as isize))
            .sum()
    });
    GrayImage::from_fn(w, h, |x, y| {
        taps.iter()
            .enumerate()
            .map(|(k, t)| t * horizontal.get_clamped(x as isize, y as isize + k as isize - radius))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0))
    }

    // Oracle: stencil written with explicit index arithmetic instead of clamped lookups.
    fn oracle_gradient(img: &GrayImage, x: usize, y: usize) -> [f64; 2] {
        let w = img.width();
        let h = img.height();
        let p = img.pixels();
        let at = |xx: usize, yy: usize| p[yy * w + xx];
        let gx = match x {
            0 => at(1, y) - at(0, y),
            _ if x == w - 1 => at(x, y) - at(x - 1, y),
            _ => (at(x + 1, y) - at(x - 1, y)) / 2.0,
        };
        let gy = match y {
            0 => at(x, 1) - at(x, 0),
            _ if y == h - 1 => at(x, y) - at(x, y - 1),
            _ => (at(x, y + 1) - at(x, y - 1)) / 2.0,
        };
        [gx, gy]
    }

    #[test]
    fn rejects_tiny_images() {
        let img = GrayImage::constant(2, 5, 1.0);
        assert!(matches!(gradient(&img), Err(Error::Dimension(_))));
        assert!(matches!(laplacian(&img), Err(Error::Dimension(_))));
        let field = VectorField::from_fn(5, 2, |_, _| [0.0, 0.0]);
        assert!(matches!(laplace_of_field(&field), Err(Error::Dimension(_))));
    }

    #[test]
    fn mismatched_pixel_count_is_rejected() {
        assert!(GrayImage::new(3, 3, vec![0.0; 8]).is_err());
        assert!(VectorField::new(3, 3, vec![[0.0; 2]; 10]).is_err());
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = gradient(&GrayImage::constant(6, 5, 7.0)).unwrap();
        assert!(g.vectors().iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    }

    #[test]
    fn gradient_of_ramp_is_exact_inside() {
        let img = GrayImage::from_fn(8, 8, |x, _| 2.0 * x as f64);
        let g = gradient(&img).unwrap();
        assert_eq!(g.get(4, 4), [2.0, 0.0]);
        assert_eq!(g.get(0, 4), [2.0, 0.0]);
        assert_eq!(g.get(7, 0), [2.0, 0.0]);
    }

    #[test]
    fn gradient_matches_stencil_oracle() {
        let img = random_image(7, 7, 3);
        let g = gradient(&img).unwrap();
        for y in 0..7 {
            for x in 0..7 {
                let want = oracle_gradient(&img, x, y);
                let got = g.get(x, y);
                assert!((want[0] - got[0]).abs() < 1e-12 && (want[1] - got[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let flat = laplacian(&GrayImage::constant(5, 5, 3.0)).unwrap();
        assert!(flat.values().iter().all(|&v| v == 0.0));

        let ramp = GrayImage::from_fn(9, 9, |x, y| 1.5 * x as f64 - 0.5 * y as f64);
        assert!(laplacian(&ramp).unwrap().get(4, 4).abs() < 1e-12);

        let quad = GrayImage::from_fn(9, 9, |x, _| (x * x) as f64);
        assert_eq!(laplacian(&quad).unwrap().get(4, 4), 2.0);
    }

    #[test]
    fn laplace_of_field_examples() {
        let flat = VectorField::from_fn(5, 5, |_, _| [1.0, -2.0]);
        assert!(laplace_of_field(&flat)
            .unwrap()
            .vectors()
            .iter()
            .all(|v| v == &[0.0, 0.0]));

        let linear = VectorField::from_fn(7, 7, |x, y| [x as f64, y as f64]);
        assert_eq!(laplace_of_field(&linear).unwrap().get(3, 3), [0.0, 0.0]);

        // vx = 3x^2 + 1 is the central-difference gradient of x^3
        let cubic = GrayImage::from_fn(9, 9, |x, _| (x * x * x) as f64);
        let g = gradient(&cubic).unwrap();
        assert_eq!(g.get(4, 4)[0], 3.0 * 16.0 + 1.0);
        let d = laplace_of_field(&g).unwrap();
        assert!((d.get(4, 4)[0] + 1.5).abs() < 1e-12);
        assert_eq!(d.get(4, 4)[1], 0.0);
    }

    #[test]
    fn blur_preserves_constant_and_mass() {
        let img = GrayImage::constant(12, 10, 4.0);
        let b = gaussian_blur(&img, 1.7);
        assert!(b.pixels().iter().all(|v| (v - 4.0).abs() < 1e-12));
        let k = gaussian_kernel(2.0);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(k.len(), 13);
    }

    #[test]
    fn bilinear_is_exact_on_lattice_and_linear_between() {
        let img = GrayImage::from_fn(5, 4, |x, y| (x + 10 * y) as f64);
        assert_eq!(img.bilinear(3.0, 2.0), 23.0);
        assert!((img.bilinear(1.25, 0.5) - 6.25).abs() < 1e-12);
        // replicate extension
        assert_eq!(img.bilinear(-3.0, 0.0), 0.0);
        assert_eq!(img.bilinear(10.0, 10.0), 34.0);
    }

    #[test]
    fn rotations_compose() {
        let img = random_image(5, 3, 11);
        let r90 = img.rotate90();
        assert_eq!((r90.width(), r90.height()), (3, 5));
        // (x, y) = (4, 0) lands at (h - 1 - y, x) = (2, 4)
        assert_eq!(r90.get(2, 4), img.get(4, 0));
        assert_eq!(r90.rotate90(), img.rotate180());
        assert_eq!(img.rotate180().rotate180(), img);
    }

    #[test]
    fn stokes_identity_on_random_rectangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..200 {
            let img = random_image(9, 9, trial);
            let x = rng.gen_range(0..9);
            let y = rng.gen_range(0..9);
            let w = rng.gen_range(1..=9 - x);
            let h = rng.gen_range(1..=9 - y);
            let rect = Rect::new(x, y, w, h);
            let a = region_laplacian_sum(&img, rect).unwrap();
            let b = region_boundary_flux(&img, rect).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn rect_outside_raster_is_rejected() {
        let img = GrayImage::constant(5, 5, 0.0);
        assert!(region_boundary_flux(&img, Rect::new(3, 3, 3, 1)).is_err());
        assert!(region_laplacian_sum(&img, Rect::new(0, 0, 0, 1)).is_err());
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn operators_are_affine_covariant(
            seed in any::<u64>(),
            a in -4.0f64..4.0,
            b in -100.0f64..100.0,
        ) {
            let img = random_image(6, 7, seed);
            let shifted = img.map(|v| a * v + b);
            let g0 = gradient(&img).unwrap();
            let g1 = gradient(&shifted).unwrap();
            let l0 = laplacian(&img).unwrap();
            let l1 = laplacian(&shifted).unwrap();
            let d0 = laplace_of_field(&g0).unwrap();
            let d1 = laplace_of_field(&g0.map(|v| [a * v[0], a * v[1]])).unwrap();
            for i in 0..g0.vectors().len() {
                for c in 0..2 {
                    prop_assert!(close(g1.vectors()[i][c], a * g0.vectors()[i][c]));
                    prop_assert!(close(d1.vectors()[i][c], a * d0.vectors()[i][c]));
                }
                prop_assert!(close(l1.values()[i], a * l0.values()[i]));
            }
        }

        #[test]
        fn operators_negate_under_negation(seed in any::<u64>()) {
            let img = random_image(5, 5, seed);
            let neg = img.map(|v| -v);
            let l0 = laplacian(&img).unwrap();
            let l1 = laplacian(&neg).unwrap();
            prop_assert!(l0.values().iter().zip(l1.values()).all(|(p, q)| *p == -*q));
            let g = gradient(&img).unwrap();
            let d0 = laplace_of_field(&g).unwrap();
            let d1 = laplace_of_field(&g.map(|v| [-v[0], -v[1]])).unwrap();
            prop_assert!(d0.vectors().iter().zip(d1.vectors()).all(|(p, q)| p[0] == -q[0] && p[1] == -q[1]));
        }
    }
}
