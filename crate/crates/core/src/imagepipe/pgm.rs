//! 8-bit grayscale images and binary PGM (P5) I/O.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Wraps row-major pixels.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Parses a binary PGM with maxval 255.
    pub fn from_pgm_bytes(data: &[u8]) -> Result<Self> {
        let mut cursor = HeaderCursor { data, pos: 0 };
        match data.get(..2) {
            Some(b"P5") => {}
            Some(magic) if magic.first() == Some(&b'P') => {
                return Err(Error::Format(format!(
                    "unsupported netpbm variant {}, only binary P5 is accepted",
                    String::from_utf8_lossy(magic)
                )))
            }
            _ => return Err(Error::Format("missing P5 magic number".into())),
        }
        cursor.pos = 2;
        let width = cursor.number("width")?;
        let height = cursor.number("height")?;
        let maxval = cursor.number("maxval")?;
        if maxval != 255 {
            return Err(Error::Format(format!(
                "maxval {maxval} is unsupported, expected 255"
            )));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match data.get(cursor.pos) {
            Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
            _ => {
                return Err(Error::Format(
                    "header is not terminated by whitespace".into(),
                ))
            }
        }
        if width == 0 || height == 0 {
            return Err(Error::Format(format!("degenerate size {width}x{height}")));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::Format("image size overflows".into()))?;
        let raster = &data[cursor.pos..];
        if raster.len() < n {
            return Err(Error::Format(format!(
                "truncated raster: expected {n} bytes, found {}",
                raster.len()
            )));
        }
        Self::new(width, height, raster[..n].to_vec())
    }

    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_pgm_bytes(&fs::read(path)?)
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_pgm_bytes())?;
        Ok(())
    }

    /// A deterministic natural-looking test scene whose histogram spans the
    /// 8-bit range: a horizontal illumination ramp, soft-edged discs, a
    /// textured band and low-level sensor-like noise.
    pub fn synthetic(width: usize, height: usize) -> Result<Self> {
        use rand::Rng;

        let w = width as f64;
        let h = height as f64;
        let discs = [
            (0.30, 0.35, 0.18, 60.0),
            (0.68, 0.30, 0.12, -55.0),
            (0.55, 0.72, 0.22, 40.0),
            (0.20, 0.78, 0.09, -45.0),
        ];
        let mut noise = crate::rng::stream(0x5eed, 0);
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                let x = (col as f64 + 0.5) / w;
                let y = (row as f64 + 0.5) / h;
                let mut v = 12.0 + 231.0 * x + 10.0 * (3.0 * y).sin();
                for &(cx, cy, r, amp) in &discs {
                    let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                    let edge = 1.0 / (1.0 + ((d - r) / 0.01).exp());
                    v += amp * edge * (1.0 - 0.5 * d / r).max(0.3);
                }
                if (0.45..0.55).contains(&y) {
                    v += 12.0 * (40.0 * x).sin() * (25.0 * y).cos();
                }
                v += 3.0 * (7.3 * x + 3.1 * y).sin() * (5.7 * y - 2.3 * x).cos();
                v += noise.random_range(-2.0..2.0);
                pixels.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
        Self::new(width, height, pixels)
    }
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("malformed header: missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("malformed header: bad {what}")))
    }
}
