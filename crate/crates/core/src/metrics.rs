//! Image quality (PSNR, SSIM) and sparsity measurements.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::pipeline::DenoiseStats;

/// PSNR in dB with an explicit mean squared error. Identical images give
/// `f64::INFINITY`.
pub fn psnr(reference: &GrayImage, test: &GrayImage, max_value: f64) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (max_value * max_value / mse).log10())
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

fn check_dims(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.same_dims(b) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

/// Uniform sliding-window SSIM settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    pub window: usize,
    pub c1: f64,
    pub c2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 8,
            c1: (0.01f64 * 255.0).powi(2),
            c2: (0.03f64 * 255.0).powi(2),
        }
    }
}

/// First and second order statistics of two co-located windows.
///
/// Variances and covariance use the population (`1/n`) normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov: f64,
}

impl WindowStats {
    pub fn ssim(&self, c1: f64, c2: f64) -> f64 {
        ((2.0 * self.mean_a * self.mean_b + c1) * (2.0 * self.cov + c2))
            / ((self.mean_a.powi(2) + self.mean_b.powi(2) + c1) * (self.var_a + self.var_b + c2))
    }
}

/// Two-pass statistics of the `window x window` block whose top-left is `(row, col)`.
pub fn window_stats(a: &GrayImage, b: &GrayImage, row: usize, col: usize, window: usize) -> WindowStats {
    let n = (window * window) as f64;
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in row..row + window {
        for j in col..col + window {
            sa += a.get(i, j);
            sb += b.get(i, j);
        }
    }
    let (mean_a, mean_b) = (sa / n, sb / n);
    let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
    for i in row..row + window {
        for j in col..col + window {
            let da = a.get(i, j) - mean_a;
            let db = b.get(i, j) - mean_b;
            va += da * da;
            vb += db * db;
            cov += da * db;
        }
    }
    WindowStats {
        mean_a,
        mean_b,
        var_a: va / n,
        var_b: vb / n,
        cov: cov / n,
    }
}

/// Mean SSIM over every window position (stride 1).
pub fn ssim(a: &GrayImage, b: &GrayImage, cfg: &SsimConfig) -> Result<f64> {
    check_dims(a, b)?;
    let w = cfg.window;
    if w == 0 || w > a.width() || w > a.height() {
        return Err(Error::invalid(format!(
            "SSIM window {w} does not fit a {}x{} image",
            a.width(),
            a.height()
        )));
    }
    if !(cfg.c1 > 0.0 && cfg.c2 > 0.0) {
        return Err(Error::invalid("SSIM constants must be positive"));
    }
    let rows = a.height() - w + 1;
    let cols = a.width() - w + 1;
    let mut total = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            total += window_stats(a, b, r, c, w).ssim(cfg.c1, cfg.c2);
        }
    }
    Ok(total / (rows * cols) as f64)
}

/// Mean number of selected atoms per patch and that mean as a fraction of the
/// atom dimension, computed from the per-count histogram.
pub fn sparsity_summary(stats: &DenoiseStats, atom_dim: usize) -> (f64, f64) {
    let selected_histogram = &stats.selected_histogram;
    let patches: usize = selected_histogram.iter().sum();
    if patches == 0 || atom_dim == 0 {
        return (0.0, 0.0);
    }
    let weighted: usize = selected_histogram.iter().enumerate().map(|(k, n)| k * n).sum();
    let mean = weighted as f64 / patches as f64;
    (mean, mean / atom_dim as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic;

    #[test]
    fn psnr_closed_forms() {
        let a = synthetic::checkerboard(16, 4);
        assert_eq!(psnr(&a, &a, 255.0).unwrap(), f64::INFINITY);
        let plus_one = GrayImage::from_fn(16, 16, |r, c| a.get(r, c) + if (r + c) % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        assert!((psnr(&a, &plus_one, 255.0).unwrap() - 20.0 * 255f64.log10()).abs() < 1e-9);
        assert!((psnr(&a, &plus_one, 255.0).unwrap() - 48.1308).abs() < 1e-4);
        let black = GrayImage::filled(8, 8, 0.0).unwrap();
        let white = GrayImage::filled(8, 8, 255.0).unwrap();
        assert!(psnr(&black, &white, 255.0).unwrap().abs() < 1e-12);
        assert!(psnr(&black, &GrayImage::filled(8, 9, 0.0).unwrap(), 255.0).is_err());
    }

    #[test]
    fn ssim_identities() {
        let cfg = SsimConfig::default();
        let a = synthetic::blobs(32);
        assert!((ssim(&a, &a, &cfg).unwrap() - 1.0).abs() < 1e-12);

        let c100 = GrayImage::filled(16, 16, 100.0).unwrap();
        let c150 = GrayImage::filled(16, 16, 150.0).unwrap();
        let want = (2.0 * 100.0 * 150.0 + cfg.c1) / (100.0f64.powi(2) + 150.0f64.powi(2) + cfg.c1);
        let got = ssim(&c100, &c150, &cfg).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.923093).abs() < 1e-6);

        let board = synthetic::checkerboard(32, 1);
        let inv = board.map(|v| 255.0 - v);
        assert!(ssim(&board, &inv, &cfg).unwrap() < 0.0);
    }

    #[test]
    fn ssim_errors() {
        let cfg = SsimConfig::default();
        let a = GrayImage::filled(7, 20, 1.0).unwrap();
        assert!(ssim(&a, &a, &cfg).is_err());
        let b = GrayImage::filled(20, 20, 1.0).unwrap();
        let c = GrayImage::filled(20, 21, 1.0).unwrap();
        assert!(ssim(&b, &c, &cfg).is_err());
    }

    fn stats(histogram: Vec<usize>) -> DenoiseStats {
        DenoiseStats {
            patches_total: histogram.iter().sum(),
            mean_selected: 0.0,
            selected_histogram: histogram,
            mean_residual: 0.0,
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn sparsity() {
        assert_eq!(sparsity_summary(&stats(vec![50]), 144), (0.0, 0.0));
        let mut h = vec![0; 37];
        h[36] = 10;
        assert_eq!(sparsity_summary(&stats(h), 144), (36.0, 0.25));
        let mut h = vec![0; 21];
        h[10] = 100;
        h[20] = 100;
        assert_eq!(sparsity_summary(&stats(h), 144).0, 15.0);
    }
}
