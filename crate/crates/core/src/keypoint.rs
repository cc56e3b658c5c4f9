use std::f64::consts::TAU;

/// Interest point: sub-pixel location, scale (σ in pixels), orientation and detector score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    /// Radians in `[0, 2π)`.
    pub orientation: f64,
    pub response: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, scale: f64, orientation: f64) -> Self {
        Self {
            x,
            y,
            scale,
            orientation: normalize_angle(orientation),
            response: 0.0,
        }
    }

    pub fn with_response(mut self, response: f64) -> Self {
        self.response = response;
        self
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = normalize_angle(orientation);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.scale.is_finite() && self.orientation.is_finite()
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}
