//! Patch-based denoising: extract overlapping patches, remove each patch's
//! mean, sparse-code the remainder with OMP, restore the mean and average the
//! overlapping estimates back into an image.

use std::time::Instant;

use rayon::prelude::*;

use crate::basis::{BasisKind, DEFAULT_KRAWTCHOUK_P};
use crate::dictionary::{build_dictionary, Dictionary};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::omp::{omp_encode, reconstruct, StoppingRule};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub patch_size: usize,
    pub stride: usize,
    /// Inputs are resampled to this `(width, height)` before processing.
    pub resize_to: Option<(usize, usize)>,
    /// Residual threshold gain `g` in `||r|| <= g * sigma * sqrt(d)`.
    pub stop_gain: f64,
    pub max_atoms: usize,
    pub basis: BasisKind,
    pub p1: f64,
    pub p2: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            patch_size: 12,
            stride: 1,
            resize_to: Some((144, 144)),
            stop_gain: 1.15,
            max_atoms: 36,
            basis: BasisKind::Tchebichef,
            p1: DEFAULT_KRAWTCHOUK_P,
            p2: DEFAULT_KRAWTCHOUK_P,
        }
    }
}

impl PipelineConfig {
    pub fn with_basis(mut self, basis: BasisKind) -> Self {
        self.basis = basis;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 2 {
            return Err(Error::invalid("patch size must be at least 2"));
        }
        if self.stride == 0 || self.stride > self.patch_size {
            return Err(Error::invalid(format!(
                "stride must be in 1..={} so patches cover every pixel, got {}",
                self.patch_size, self.stride
            )));
        }
        if !(self.stop_gain.is_finite() && self.stop_gain > 0.0) {
            return Err(Error::invalid(format!(
                "stop gain must be positive, got {}",
                self.stop_gain
            )));
        }
        let d = self.patch_size * self.patch_size;
        if self.max_atoms == 0 || self.max_atoms > d - 1 {
            return Err(Error::invalid(format!(
                "max_atoms must be in 1..={}, got {}",
                d - 1,
                self.max_atoms
            )));
        }
        if let Some((w, h)) = self.resize_to {
            if w < self.patch_size || h < self.patch_size {
                return Err(Error::invalid(format!(
                    "resize target {w}x{h} is smaller than the {0}x{0} patch",
                    self.patch_size
                )));
            }
        }
        self.basis.validate()?;
        if matches!(self.basis, BasisKind::Krawtchouk { .. }) {
            BasisKind::krawtchouk(self.p1)?;
            BasisKind::krawtchouk(self.p2)?;
        }
        Ok(())
    }

    /// Applies the configured resize, if any.
    pub fn prepare(&self, img: &GrayImage) -> Result<GrayImage> {
        match self.resize_to {
            Some((w, h)) => img.resize_bilinear(w, h),
            None => Ok(img.clone()),
        }
    }
}

/// Summary of all sparse codes produced while denoising one image.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseStats {
    pub patches_total: usize,
    /// Mean number of atoms per patch code.
    pub mean_selected: f64,
    /// `selected_histogram[k]` = number of patches coded with exactly `k` atoms.
    pub selected_histogram: Vec<usize>,
    pub mean_residual: f64,
    pub wall_time_ms: f64,
}

/// One square patch, row-major, anchored at its top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub row: usize,
    pub col: usize,
    pub values: Vec<f64>,
}

/// Anchors `0, stride, 2 * stride, ...` plus one flush with the far border.
pub fn patch_anchors(len: usize, patch: usize, stride: usize) -> Vec<usize> {
    if patch > len || stride == 0 {
        return Vec::new();
    }
    let last = len - patch;
    let mut anchors: Vec<usize> = (0..=last).step_by(stride).collect();
    if anchors.last() != Some(&last) {
        anchors.push(last);
    }
    anchors
}

pub fn extract_patches(img: &GrayImage, patch_size: usize, stride: usize) -> Result<Vec<Patch>> {
    check_patch_geometry(img.width(), img.height(), patch_size, stride)?;
    let rows = patch_anchors(img.height(), patch_size, stride);
    let cols = patch_anchors(img.width(), patch_size, stride);
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for &r in &rows {
        for &c in &cols {
            out.push(read_patch(img, r, c, patch_size));
        }
    }
    Ok(out)
}

fn check_patch_geometry(width: usize, height: usize, patch_size: usize, stride: usize) -> Result<()> {
    if patch_size == 0 || stride == 0 {
        return Err(Error::invalid("patch size and stride must be positive"));
    }
    if patch_size > width || patch_size > height {
        return Err(Error::invalid(format!(
            "{patch_size}x{patch_size} patch does not fit a {width}x{height} image"
        )));
    }
    Ok(())
}

fn read_patch(img: &GrayImage, row: usize, col: usize, size: usize) -> Patch {
    let mut values = Vec::with_capacity(size * size);
    for i in row..row + size {
        for j in col..col + size {
            values.push(img.get(i, j));
        }
    }
    Patch { row, col, values }
}

/// Subtracts the mean; returns the centered vector and the mean.
pub fn center_patch(patch: &[f64]) -> (Vec<f64>, f64) {
    if patch.is_empty() {
        return (Vec::new(), 0.0);
    }
    let mean = patch.iter().sum::<f64>() / patch.len() as f64;
    (patch.iter().map(|v| v - mean).collect(), mean)
}

/// Per-pixel average of all patch estimates covering each pixel, clamped to
/// `[0, 255]`. Accumulation runs in slice order, so the result does not depend
/// on how the estimates were produced.
pub fn aggregate_patches(estimates: &[Patch], width: usize, height: usize) -> Result<GrayImage> {
    let mut sum = vec![0.0; width * height];
    let mut count = vec![0u32; width * height];
    for p in estimates {
        let side = (p.values.len() as f64).sqrt() as usize;
        if side * side != p.values.len() || side == 0 {
            return Err(Error::invalid(format!(
                "patch at ({}, {}) is not square ({} values)",
                p.row,
                p.col,
                p.values.len()
            )));
        }
        if p.row + side > height || p.col + side > width {
            return Err(Error::invalid(format!(
                "patch at ({}, {}) of size {side} exceeds the {width}x{height} image",
                p.row, p.col
            )));
        }
        for i in 0..side {
            let base = (p.row + i) * width + p.col;
            for j in 0..side {
                sum[base + j] += p.values[i * side + j];
                count[base + j] += 1;
            }
        }
    }
    if let Some(idx) = count.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!(
            "pixel ({}, {}) is not covered by any patch",
            idx / width,
            idx % width
        )));
    }
    let data = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| (s / c as f64).clamp(0.0, 255.0))
        .collect();
    GrayImage::new(width, height, data)
}

/// A configured dictionary ready to denoise any number of images.
#[derive(Debug, Clone)]
pub struct Denoiser {
    cfg: PipelineConfig,
    dict: Dictionary,
}

impl Denoiser {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let dict = build_dictionary(cfg.basis, cfg.patch_size, cfg.p1, cfg.p2)?;
        Ok(Self { cfg, dict })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn stopping_rule(&self, sigma: f64) -> StoppingRule {
        StoppingRule::noise_aware(self.cfg.stop_gain, sigma, self.dict.atom_dim(), self.cfg.max_atoms)
    }

    /// Denoises `noisy` (already at its working resolution); `sigma` is the
    /// known noise standard deviation used by the stopping rule.
    pub fn denoise(&self, noisy: &GrayImage, sigma: f64) -> Result<(GrayImage, DenoiseStats)> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(format!("sigma must be non-negative, got {sigma}")));
        }
        let start = Instant::now();
        let rule = self.stopping_rule(sigma);
        let patches = extract_patches(noisy, self.cfg.patch_size, self.cfg.stride)?;

        let coded: Vec<(Patch, usize, f64)> = patches
            .into_par_iter()
            .map(|patch| {
                let (centered, mean) = center_patch(&patch.values);
                let code = omp_encode(&self.dict, &centered, &rule)?;
                let mut values = reconstruct(&self.dict, &code)?;
                values.iter_mut().for_each(|v| *v += mean);
                let estimate = Patch {
                    row: patch.row,
                    col: patch.col,
                    values,
                };
                Ok((estimate, code.len(), code.residual_norm))
            })
            .collect::<Result<_>>()?;

        let mut histogram = vec![0usize; self.cfg.max_atoms + 1];
        let mut residual_sum = 0.0;
        for (_, k, r) in &coded {
            histogram[*k] += 1;
            residual_sum += r;
        }
        let estimates: Vec<Patch> = coded.into_iter().map(|(p, _, _)| p).collect();
        let out = aggregate_patches(&estimates, noisy.width(), noisy.height())?;

        let n = estimates.len();
        let selected: usize = histogram.iter().enumerate().map(|(k, c)| k * c).sum();
        let stats = DenoiseStats {
            patches_total: n,
            mean_selected: selected as f64 / n as f64,
            selected_histogram: histogram,
            mean_residual: residual_sum / n as f64,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        Ok((out, stats))
    }
}

/// One-shot convenience over [`Denoiser`]. No resizing is applied here; see
/// [`PipelineConfig::prepare`].
pub fn denoise_image(noisy: &GrayImage, cfg: &PipelineConfig, sigma: f64) -> Result<(GrayImage, DenoiseStats)> {
    Denoiser::new(cfg.clone())?.denoise(noisy, sigma)
}
