//! Benchmark grid runner: images x noise ratios x seeds x bases.
//!
//! Every `(image, ratio, seed)` cell draws one noisy image and denoises it
//! with each basis, so the bases are always compared on the same noise
//! realization. Output lands in the configured directory:
//!
//! * `results.csv`: one row per `(image, basis, ratio, seed)`
//! * `<image>_selected.dat`, `<image>_ssim.dat`: noise ratio against mean
//!   selected atoms / SSIM, one column per basis (averaged over seeds)
//! * `<image>_noisy_r<ratio>_s<seed>.pgm` and
//!   `<image>_<basis>_r<ratio>_s<seed>.pgm`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::basis::BasisKind;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::io::{load_image, save_image};
use crate::metrics::{psnr, ssim, SsimConfig};
use crate::noise::{add_gaussian_noise, NoiseSpec};
use crate::pipeline::{Denoiser, PipelineConfig};

pub const CSV_HEADER: &str = "image,basis,noise_ratio,seed,psnr_db,ssim,mean_selected,wall_time_ms";

/// Noise ratios of the standard benchmark grid.
pub const STANDARD_RATIOS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

/// Worker cap for the rayon pool; `0` or unset means one per core.
pub const THREADS_ENV: &str = "MOMENT_CS_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image_name: String,
    pub basis: BasisKind,
    pub noise_ratio: f64,
    pub seed: u64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub mean_selected: f64,
    pub wall_time_ms: f64,
}

impl BenchRow {
    pub fn csv_line(&self, with_timing: bool) -> String {
        let time = if with_timing {
            format!("{:.3}", self.wall_time_ms)
        } else {
            "0".to_string()
        };
        format!(
            "{},{},{},{},{:.4},{:.6},{:.4},{}",
            self.image_name,
            self.basis.label(),
            self.noise_ratio,
            self.seed,
            self.psnr_db,
            self.ssim,
            self.mean_selected,
            time
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Basis, Krawtchouk parameters, patching and stopping settings; the
    /// `basis` field is ignored in favor of `bases`.
    pub pipeline: PipelineConfig,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub bases: Vec<BasisKind>,
    pub ratios: Vec<f64>,
    /// Write measured wall time; when false the column is written as `0`
    /// so reruns produce identical bytes.
    pub record_timing: bool,
    pub clamp_noise: bool,
    pub save_images: bool,
}

impl RunConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            out_dir: out_dir.into(),
            seeds: vec![1],
            bases: vec![BasisKind::Tchebichef, BasisKind::Krawtchouk { p: 0.5 }, BasisKind::Dct],
            ratios: STANDARD_RATIOS.to_vec(),
            record_timing: true,
            clamp_noise: true,
            save_images: true,
        }
    }

    fn validate(&self, inputs: usize) -> Result<()> {
        if inputs == 0 {
            return Err(Error::invalid("benchmark needs at least one input image"));
        }
        if self.bases.is_empty() || self.ratios.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid(
                "benchmark needs at least one basis, one noise ratio and one seed",
            ));
        }
        for &r in &self.ratios {
            NoiseSpec::new(r, 0)?;
        }
        let mut labels: Vec<&str> = self.bases.iter().map(|b| b.label()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.bases.len() {
            return Err(Error::invalid("each basis may appear only once"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub csv_path: PathBuf,
    pub plot_files: Vec<PathBuf>,
}

/// Builds the worker pool, honoring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

/// Image name used in CSV rows and output files: the file stem.
pub fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string())
}

/// Loads every path and runs the grid.
pub fn run_benchmark(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<BenchOutcome> {
    let images = inputs
        .iter()
        .map(|p| Ok((image_name(p), load_image(p)?)))
        .collect::<Result<Vec<_>>>()?;
    run_benchmark_images(cfg, &images)
}

/// Runs the grid on already loaded clean images.
pub fn run_benchmark_images(cfg: &RunConfig, images: &[(String, GrayImage)]) -> Result<BenchOutcome> {
    cfg.validate(images.len())?;
    fs::create_dir_all(&cfg.out_dir).map_err(|source| Error::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let pool = thread_pool()?;
    let denoisers = cfg
        .bases
        .iter()
        .map(|&b| Denoiser::new(cfg.pipeline.clone().with_basis(b)))
        .collect::<Result<Vec<_>>>()?;
    let ssim_cfg = SsimConfig::default();

    let mut rows = Vec::new();
    for (name, raw) in images {
        let clean = cfg.pipeline.prepare(raw)?;
        for &ratio in &cfg.ratios {
            for &seed in &cfg.seeds {
                let mut spec = NoiseSpec::new(ratio, seed)?;
                if !cfg.clamp_noise {
                    spec = spec.unclamped();
                }
                let noisy = add_gaussian_noise(&clean, &spec);
                if cfg.save_images {
                    save_image(&noisy, cfg.out_dir.join(format!("{name}_noisy_r{ratio:.2}_s{seed}.pgm")))?;
                }
                for den in &denoisers {
                    let basis = den.config().basis;
                    let cell = || -> Result<BenchRow> {
                        let (out, stats) = pool.install(|| den.denoise(&noisy, spec.sigma()))?;
                        if cfg.save_images {
                            save_image(
                                &out,
                                cfg.out_dir
                                    .join(format!("{name}_{}_r{ratio:.2}_s{seed}.pgm", basis.label())),
                            )?;
                        }
                        Ok(BenchRow {
                            image_name: name.clone(),
                            basis,
                            noise_ratio: ratio,
                            seed,
                            psnr_db: psnr(&clean, &out, 255.0)?,
                            ssim: ssim(&clean, &out, &ssim_cfg)?,
                            mean_selected: stats.mean_selected,
                            wall_time_ms: stats.wall_time_ms,
                        })
                    };
                    rows.push(cell().map_err(|e| Error::Cell {
                        image: name.clone(),
                        basis: basis.label().to_string(),
                        ratio,
                        source: Box::new(e),
                    })?);
                }
            }
        }
    }

    let csv_path = cfg.out_dir.join("results.csv");
    write_file(&csv_path, &results_csv(&rows, cfg.record_timing))?;

    let mut plot_files = Vec::new();
    for (name, _) in images {
        for (suffix, metric) in [("selected", Metric::MeanSelected), ("ssim", Metric::Ssim)] {
            let path = cfg.out_dir.join(format!("{name}_{suffix}.dat"));
            write_file(&path, &plot_data(&rows, name, &cfg.bases, metric))?;
            plot_files.push(path);
        }
    }

    Ok(BenchOutcome {
        rows,
        csv_path,
        plot_files,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn results_csv(rows: &[BenchRow], with_timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line(with_timing));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MeanSelected,
    Ssim,
    Psnr,
}

impl Metric {
    fn of(&self, row: &BenchRow) -> f64 {
        match self {
            Metric::MeanSelected => row.mean_selected,
            Metric::Ssim => row.ssim,
            Metric::Psnr => row.psnr_db,
        }
    }
}

/// Whitespace-separated table: ascending noise ratio, then one column per
/// basis holding the seed-averaged metric.
pub fn plot_data(rows: &[BenchRow], image: &str, bases: &[BasisKind], metric: Metric) -> String {
    let mut ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.image_name == image)
        .map(|r| r.noise_ratio)
        .collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();

    let mut out = String::from("# noise_ratio");
    for b in bases {
        out.push(' ');
        out.push_str(b.label());
    }
    out.push('\n');
    for ratio in ratios {
        let _ = write!(out, "{ratio}");
        for b in bases {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.image_name == image && r.noise_ratio == ratio && r.basis.label() == b.label())
                .map(|r| metric.of(r))
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
            let _ = write!(out, " {mean:.6}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic;

    fn small_cfg(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig::new(dir);
        cfg.pipeline.stride = 6;
        cfg.pipeline.patch_size = 8;
        cfg.pipeline.max_atoms = 16;
        cfg.pipeline.resize_to = Some((48, 48));
        cfg
    }

    #[test]
    fn one_cell_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg(dir.path());
        cfg.ratios = vec![0.1];
        let out = run_benchmark_images(&cfg, &[("blobs".into(), synthetic::blobs(64))]).unwrap();
        assert_eq!(out.rows.len(), 3);
        let csv = fs::read_to_string(&out.csv_path).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), 4);
        for f in ["blobs_noisy_r0.10_s1.pgm", "blobs_dct_r0.10_s1.pgm", "blobs_selected.dat", "blobs_ssim.dat"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn plot_axis_is_sorted_ratios() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg(dir.path());
        cfg.ratios = vec![0.3, 0.1, 0.2];
        cfg.bases = vec![BasisKind::Dct, BasisKind::Tchebichef];
        cfg.save_images = false;
        let out = run_benchmark_images(&cfg, &[("g".into(), synthetic::gradient(48))]).unwrap();
        let text = fs::read_to_string(dir.path().join("g_ssim.dat")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# noise_ratio dct tchebichef");
        let xs: Vec<f64> = lines.map(|l| l.split_whitespace().next().unwrap().parse().unwrap()).collect();
        assert_eq!(xs, vec![0.1, 0.2, 0.3]);
        assert_eq!(out.plot_files.len(), 2);
    }

    #[test]
    fn rejects_empty_or_bad_grids() {
        let dir = tempfile::tempdir().unwrap();
        let img = [("g".to_string(), synthetic::gradient(48))];
        let mut cfg = small_cfg(dir.path());
        cfg.bases.clear();
        assert!(run_benchmark_images(&cfg, &img).is_err());
        let mut cfg = small_cfg(dir.path());
        cfg.ratios = vec![1.5];
        assert!(run_benchmark_images(&cfg, &img).is_err());
        let cfg = small_cfg(dir.path());
        assert!(run_benchmark_images(&cfg, &[]).is_err());
        let mut cfg = small_cfg(dir.path());
        cfg.bases = vec![BasisKind::Dct, BasisKind::Dct];
        assert!(run_benchmark_images(&cfg, &img).is_err());
    }

    #[test]
    fn failing_cell_names_its_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg(dir.path());
        cfg.pipeline.resize_to = None;
        cfg.ratios = vec![0.2];
        // 6x6 image cannot hold an 8x8 patch
        let err = run_benchmark_images(&cfg, &[("tiny".into(), synthetic::gradient(6))]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tiny") && msg.contains("tchebichef") && msg.contains("0.2"), "{msg}");
    }

    #[test]
    fn csv_formatting() {
        let row = BenchRow {
            image_name: "lena".into(),
            basis: BasisKind::Krawtchouk { p: 0.5 },
            noise_ratio: 0.1,
            seed: 7,
            psnr_db: 30.123456,
            ssim: 0.9,
            mean_selected: 3.5,
            wall_time_ms: 12.3456,
        };
        assert_eq!(row.csv_line(true), "lena,krawtchouk,0.1,7,30.1235,0.900000,3.5000,12.346");
        assert_eq!(row.csv_line(false), "lena,krawtchouk,0.1,7,30.1235,0.900000,3.5000,0");
    }
}
