//! Image loading. PGM (`P2` ASCII and `P5` binary) is parsed natively; other
//! formats go through the `image` crate and are converted to luma with
//! `0.299 R + 0.587 G + 0.114 B`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Loads a grayscale raster from `path`, choosing the decoder from the file contents.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        return parse_pgm(&bytes).map_err(|m| Error::parse(path, m));
    }
    let decoded = ::image::load_from_memory(&bytes).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb
        .pixels()
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect();
    GrayImage::new(w as usize, h as usize, pixels)
}

/// Parses a PGM byte stream. Samples are rescaled to `[0, 255]` when `maxval != 255`.
pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let magic = cursor.token().ok_or("missing PGM magic")?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(format!("unsupported magic {other:?}")),
    };
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    if width == 0 || height == 0 {
        return Err(format!("empty image {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let count = width * height;
    let scale = 255.0 / maxval as f64;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = cursor.pos + 1;
        let sample_bytes = if maxval < 256 { 1 } else { 2 };
        let data = bytes
            .get(start..start + count * sample_bytes)
            .ok_or_else(|| format!("raster truncated: expected {} bytes", count * sample_bytes))?;
        if sample_bytes == 1 {
            pixels.extend(data.iter().map(|&b| b as f64 * scale));
        } else {
            pixels.extend(
                data.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale),
            );
        }
    } else {
        for i in 0..count {
            let v = cursor
                .token()
                .ok_or_else(|| format!("raster truncated at sample {i}"))?;
            let v: usize = v.parse().map_err(|_| format!("bad sample {v:?}"))?;
            if v > maxval {
                return Err(format!("sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64 * scale);
        }
    }
    GrayImage::new(width, height, pixels).map_err(|e| e.to_string())
}

/// Encodes an image as binary PGM, rounding and clamping to `[0, 255]`.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.pixels().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    out
}

pub fn save_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn token(&mut self) -> Option<String> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> std::result::Result<usize, String> {
        let t = self.token().ok_or("header truncated")?;
        t.parse().map_err(|_| format!("bad header field {t:?}"))
    }
}
