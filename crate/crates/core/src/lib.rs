//! Compressive-sensing style image denoising with discrete orthogonal moment
//! dictionaries.
//!
//! Tchebichef, Krawtchouk and DCT bases are turned into separable patch
//! dictionaries, noisy patches are sparse-coded with Orthogonal Matching
//! Pursuit and the reconstructions are averaged back into an image. The
//! [`bench`] module reproduces the full image x noise-ratio x basis grid.

pub mod basis;
pub mod bench;
pub mod config;
pub mod dictionary;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod omp;
pub mod pipeline;

pub use basis::{BasisKind, BasisMatrix};
pub use bench::{run_benchmark, run_benchmark_images, BenchRow, RunConfig};
pub use config::Settings;
pub use dictionary::{build_dictionary, Dictionary};
pub use error::{Error, ImageIoError, Result};
pub use image::GrayImage;
pub use noise::NoiseSpec;
pub use omp::{omp_encode, reconstruct, SparseCode, StoppingRule};
pub use pipeline::{denoise_image, DenoiseStats, Denoiser, PipelineConfig};
