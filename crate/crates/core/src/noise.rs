//! Seeded additive white Gaussian noise.
//!
//! Draws come from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha) mapped
//! through `rand_distr::StandardNormal`, one draw per pixel in row-major
//! order. Output is therefore reproducible bit for bit on any machine running
//! this implementation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Noise level expressed as a fraction of the 8-bit range: `sigma = ratio * 255`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    ratio: f64,
    seed: u64,
    clamp: bool,
}

impl NoiseSpec {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::invalid(format!(
                "noise ratio must lie in [0, 1], got {ratio}"
            )));
        }
        Ok(Self {
            ratio,
            seed,
            clamp: true,
        })
    }

    /// Keep out-of-range noisy values instead of clamping to `[0, 255]`.
    pub fn unclamped(mut self) -> Self {
        self.clamp = false;
        self
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn clamps(&self) -> bool {
        self.clamp
    }

    pub fn sigma(&self) -> f64 {
        self.ratio * 255.0
    }
}

pub fn add_gaussian_noise(img: &GrayImage, spec: &NoiseSpec) -> GrayImage {
    let sigma = spec.sigma();
    if sigma == 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = img.clone();
    for v in out.pixels_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        let noisy = *v + sigma * z;
        *v = if spec.clamp { noisy.clamp(0.0, 255.0) } else { noisy };
    }
    out
}
