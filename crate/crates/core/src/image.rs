//! In-memory grayscale images and the geometric helpers the pipeline needs.

use crate::error::{Error, Result};

/// Row-major grayscale image with real-valued intensities, nominally on `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "pixel buffer has {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.data
    }

    pub fn same_dims(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamped(&self) -> GrayImage {
        self.map(|v| v.clamp(0.0, 255.0))
    }

    /// Bilinear resampling with pixel-center alignment and edge replication.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<GrayImage> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("resize target must be positive"));
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let sy = self.height as f64 / height as f64;
        let sx = self.width as f64 / width as f64;
        let max_r = (self.height - 1) as f64;
        let max_c = (self.width - 1) as f64;
        GrayImage::from_fn(width, height, |r, c| {
            let y = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, max_r);
            let x = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, max_c);
            let (y0, x0) = (y.floor() as usize, x.floor() as usize);
            let (y1, x1) = ((y0 + 1).min(self.height - 1), (x0 + 1).min(self.width - 1));
            let (fy, fx) = (y - y0 as f64, x - x0 as f64);
            let top = self.get(y0, x0) * (1.0 - fx) + self.get(y0, x1) * fx;
            let bottom = self.get(y1, x0) * (1.0 - fx) + self.get(y1, x1) * fx;
            top * (1.0 - fy) + bottom * fy
        })
    }
}

/// Small deterministic test scenes used when the standard benchmark photos are absent.
pub mod synthetic {
    use super::GrayImage;

    pub fn gradient(size: usize) -> GrayImage {
        let denom = (2 * size.saturating_sub(1)).max(1) as f64;
        GrayImage::from_fn(size, size, |r, c| 255.0 * (r + c) as f64 / denom).unwrap()
    }

    pub fn checkerboard(size: usize, cell: usize) -> GrayImage {
        let cell = cell.max(1);
        GrayImage::from_fn(size, size, |r, c| {
            if (r / cell + c / cell) % 2 == 0 {
                48.0
            } else {
                208.0
            }
        })
        .unwrap()
    }

    /// Soft blobs over a slanted background with one hard-edged disc.
    pub fn blobs(size: usize) -> GrayImage {
        let s = size as f64;
        let blobs = [
            (0.30, 0.35, 0.12, 90.0),
            (0.70, 0.60, 0.18, -70.0),
            (0.45, 0.80, 0.08, 60.0),
        ];
        GrayImage::from_fn(size, size, |r, c| {
            let y = r as f64 / s;
            let x = c as f64 / s;
            let mut v = 80.0 + 60.0 * x + 30.0 * y;
            for &(cy, cx, rad, amp) in &blobs {
                let d2 = (y - cy).powi(2) + (x - cx).powi(2);
                v += amp * (-d2 / (2.0 * rad * rad)).exp();
            }
            if (y - 0.25).powi(2) + (x - 0.75).powi(2) < 0.01 {
                v = 230.0;
            }
            v.clamp(0.0, 255.0)
        })
        .unwrap()
    }

    /// The synthetic substitute set, in a fixed order.
    pub fn substitute_set(size: usize) -> Vec<(String, GrayImage)> {
        vec![
            ("gradient".to_string(), gradient(size)),
            ("checkerboard".to_string(), checkerboard(size, size / 9)),
            ("blobs".to_string(), blobs(size)),
        ]
    }
}
