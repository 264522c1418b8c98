//! Real-valued image planes, the radius-one pillbox filter and image metrics.

use std::fmt;

use crate::error::{Error, Result};

use super::GrayImage;

/// Row-major real-valued image.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{width}x{height} plane needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Pixel codes divided by 256.
    pub fn normalized(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().iter().map(|&p| f64::from(p) / 256.0).collect(),
        }
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    fn check_same_shape(&self, other: &Plane) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// `self - other`.
    pub fn difference(&self, other: &Plane) -> Result<Plane> {
        self.check_same_shape(other)?;
        Ok(Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// `∫_0^x sqrt(1 - t²) dt`.
fn quarter_disk_area(x: f64) -> f64 {
    0.5 * (x * (1.0 - x * x).sqrt() + x.asin())
}

/// 3×3 weights of a radius-one disk: the area of the disk inside each unit
/// pixel cell, normalized to sum to one. Indexed `[dy + 1][dx + 1]`.
pub fn pillbox_kernel() -> [[f64; 3]; 3] {
    // The disk boundary enters the side cells at x = 1/2 and leaves the
    // corner band at x = sqrt(3)/2, where sqrt(1 - x²) = 1/2.
    let knee = 3f64.sqrt() / 2.0;
    let center = 1.0;
    let side = (knee - 0.5) + 2.0 * (quarter_disk_area(1.0) - quarter_disk_area(knee));
    let corner = quarter_disk_area(knee) - quarter_disk_area(0.5) - 0.5 * (knee - 0.5);
    let total = center + 4.0 * side + 4.0 * corner;
    let (c, s, k) = (center / total, side / total, corner / total);
    [[k, s, k], [s, c, s], [k, s, k]]
}

/// Convolves with [`pillbox_kernel`], replicating edge pixels.
pub fn pillbox_filter(plane: &Plane) -> Plane {
    let kernel = pillbox_kernel();
    let (w, h) = (plane.width, plane.height);
    let mut out = Vec::with_capacity(plane.data.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ky, row) in kernel.iter().enumerate() {
                let sy = (y + ky).saturating_sub(1).min(h - 1);
                for (kx, weight) in row.iter().enumerate() {
                    let sx = (x + kx).saturating_sub(1).min(w - 1);
                    acc += weight * plane.data[sy * w + sx];
                }
            }
            out.push(acc);
        }
    }
    Plane {
        width: w,
        height: h,
        data: out,
    }
}

pub fn mse(a: &Plane, b: &Plane) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = a.data.len() as f64;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n)
}

/// Peak signal-to-noise ratio for unit peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    /// The images are equal; the ratio is unbounded.
    Identical,
    Db(f64),
}

impl Psnr {
    /// Decibels, with `+inf` for identical inputs.
    pub fn db(self) -> f64 {
        match self {
            Psnr::Identical => f64::INFINITY,
            Psnr::Db(v) => v,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Identical => f.write_str("inf"),
            Psnr::Db(v) => write!(f, "{v}"),
        }
    }
}

pub fn psnr(a: &Plane, b: &Plane) -> Result<Psnr> {
    let e = mse(a, b)?;
    Ok(if e == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Db(-10.0 * e.log10())
    })
}

/// Biased horizontal and vertical autocorrelations of `err` at lags
/// `1..=n_lags`, each normalized by the pixel count.
pub fn spatial_autocorrelation(err: &Plane, n_lags: usize) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (err.width, err.height);
    let n = err.data.len() as f64;
    let horizontal = (1..=n_lags)
        .map(|lag| {
            if lag >= w {
                return 0.0;
            }
            let mut s = 0.0;
            for row in err.data.chunks_exact(w) {
                s += row.iter().zip(&row[lag..]).map(|(a, b)| a * b).sum::<f64>();
            }
            s / n
        })
        .collect();
    let vertical = (1..=n_lags)
        .map(|lag| {
            if lag >= h {
                return 0.0;
            }
            err.data
                .iter()
                .zip(&err.data[lag * w..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n
        })
        .collect();
    (horizontal, vertical)
}

/// Mean absolute spatial autocorrelation of an error image over horizontal
/// and vertical lags `1..=n_lags`.
pub fn artifact_score(err: &Plane, n_lags: usize) -> f64 {
    if n_lags == 0 {
        return 0.0;
    }
    let (hz, vt) = spatial_autocorrelation(err, n_lags);
    hz.iter().chain(&vt).map(|r| r.abs()).sum::<f64>() / (2 * n_lags) as f64
}
