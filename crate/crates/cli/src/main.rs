use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use moment_cs::bench::{run_benchmark, run_benchmark_images, RunConfig, STANDARD_RATIOS};
use moment_cs::dictionary::{build_dictionary, mutual_coherence, render_atlas};
use moment_cs::image::synthetic;
use moment_cs::io::{load_image, save_image};
use moment_cs::metrics::{psnr, ssim, SsimConfig};
use moment_cs::noise::{add_gaussian_noise, NoiseSpec};
use moment_cs::{Denoiser, Error, Result, Settings};

#[derive(Parser)]
#[command(name = "moment-cs", version, about = "Moment-dictionary sparse-coding image denoiser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a patch dictionary, render its atom atlas and report coherence
    Dict {
        #[command(flatten)]
        common: Common,
        /// Separator width between atlas tiles
        #[arg(long)]
        gap: Option<usize>,
        /// Also dump the atoms as CSV, one atom per line
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Add Gaussian noise to an image
    Noise {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Keep noisy values outside [0, 255] until the file is written
        #[arg(long)]
        no_clamp: bool,
    },
    /// Add noise to a clean image, denoise it and report quality
    Denoise {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Treat the input as already noisy with sigma = ratio * 255
        #[arg(long)]
        noisy_input: bool,
        /// Where to save the noisy image
        #[arg(long)]
        noisy_out: Option<PathBuf>,
    },
    /// PSNR and SSIM between two images
    Metrics { reference: PathBuf, test: PathBuf },
    /// Run the image x ratio x seed x basis grid
    Bench {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Comma separated bases, e.g. tchebichef,krawtchouk,dct
        #[arg(long)]
        bases: Option<String>,
        /// Comma separated noise ratios
        #[arg(long)]
        ratios: Option<String>,
        /// Comma separated seeds
        #[arg(long)]
        seeds: Option<String>,
        /// Use the built-in synthetic images instead of files
        #[arg(long)]
        synthetic: bool,
        /// Write 0 in the timing column so reruns are byte-identical
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        no_clamp: bool,
        /// Skip writing noisy and denoised images
        #[arg(long)]
        no_images: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    stop_gain: Option<f64>,
    #[arg(long)]
    max_atoms: Option<usize>,
    #[arg(long)]
    no_resize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` settings file; flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

impl Common {
    fn settings(&self, extra: Settings) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Settings::parse(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?
            }
            None => Settings::default(),
        };
        let flags = Settings {
            basis: self.basis.as_deref().map(str::parse).transpose()?,
            patch_size: self.patch_size,
            stride: self.stride,
            ratio: self.ratio,
            seed: self.seed,
            p1: self.p1,
            p2: self.p2,
            stop_gain: self.stop_gain,
            max_atoms: self.max_atoms,
            no_resize: self.no_resize.then_some(true),
            out: self.out.clone(),
            ..Settings::default()
        };
        Ok(file.merge(flags).merge(extra))
    }
}

fn parse_list<T: std::str::FromStr>(what: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} '{s}'")))
        })
        .collect()
}

fn noise_spec(s: &Settings) -> Result<NoiseSpec> {
    let spec = NoiseSpec::new(s.ratio.unwrap_or(0.1), s.seed.unwrap_or(1))?;
    Ok(if s.no_clamp.unwrap_or(false) { spec.unclamped() } else { spec })
}

fn out_path(s: &Settings, default: &str) -> PathBuf {
    s.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dict { common, gap, csv } => {
            let s = common.settings(Settings {
                gap,
                ..Settings::default()
            })?;
            let cfg = s.pipeline();
            let dict = build_dictionary(cfg.basis, cfg.patch_size, cfg.p1, cfg.p2)?;
            let atlas = render_atlas(&dict, s.gap.unwrap_or(1))?;
            let out = out_path(&s, "atlas.pgm");
            save_image(&atlas, &out)?;
            if let Some(csv) = csv {
                let f = fs::File::create(&csv).map_err(|source| Error::Io {
                    path: csv.clone(),
                    source,
                })?;
                dict.write_csv(std::io::BufWriter::new(f))
                    .map_err(|source| Error::Io { path: csv, source })?;
            }
            println!("coherence {:.6}", mutual_coherence(&dict)?);
        }
        Command::Noise {
            input,
            common,
            no_clamp,
        } => {
            let s = common.settings(Settings {
                no_clamp: no_clamp.then_some(true),
                ..Settings::default()
            })?;
            let clean = s.pipeline().prepare(&load_image(&input)?)?;
            let spec = noise_spec(&s)?;
            let noisy = add_gaussian_noise(&clean, &spec);
            save_image(&noisy, out_path(&s, "noisy.pgm"))?;
            println!("sigma {:.4}", spec.sigma());
            println!("PSNR: {:.4}", psnr(&clean, &noisy, 255.0)?);
        }
        Command::Denoise {
            input,
            common,
            noisy_input,
            noisy_out,
        } => {
            let s = common.settings(Settings::default())?;
            let cfg = s.pipeline();
            let spec = noise_spec(&s)?;
            let img = cfg.prepare(&load_image(&input)?)?;
            let (clean, noisy) = if noisy_input {
                (None, img)
            } else {
                let noisy = add_gaussian_noise(&img, &spec);
                (Some(img), noisy)
            };
            if let Some(p) = noisy_out {
                save_image(&noisy, p)?;
            }
            let (out, stats) = Denoiser::new(cfg)?.denoise(&noisy, spec.sigma())?;
            save_image(&out, out_path(&s, "denoised.pgm"))?;
            if let Some(clean) = clean {
                let ssim_cfg = SsimConfig::default();
                println!("noisy    PSNR: {:.4}  SSIM: {:.4}", psnr(&clean, &noisy, 255.0)?, ssim(&clean, &noisy, &ssim_cfg)?);
                println!("denoised PSNR: {:.4}  SSIM: {:.4}", psnr(&clean, &out, 255.0)?, ssim(&clean, &out, &ssim_cfg)?);
            }
            println!("mean selected atoms: {:.4}", stats.mean_selected);
            println!("patches: {}  time: {:.1} ms", stats.patches_total, stats.wall_time_ms);
        }
        Command::Metrics { reference, test } => {
            let a = load_image(&reference)?;
            let b = load_image(&test)?;
            let p = psnr(&a, &b, 255.0)?;
            if p.is_infinite() {
                println!("PSNR: inf");
            } else {
                println!("PSNR: {p:.4}");
            }
            println!("SSIM: {:.4}", ssim(&a, &b, &SsimConfig::default())?);
        }
        Command::Bench {
            inputs,
            common,
            bases,
            ratios,
            seeds,
            synthetic,
            no_timing,
            no_clamp,
            no_images,
        } => {
            let s = common.settings(Settings {
                bases: bases.as_deref().map(|b| parse_list("basis", b)).transpose()?,
                ratios: ratios.as_deref().map(|r| parse_list("ratio", r)).transpose()?,
                seeds: seeds.as_deref().map(|v| parse_list("seed", v)).transpose()?,
                no_timing: no_timing.then_some(true),
                no_clamp: no_clamp.then_some(true),
                ..Settings::default()
            })?;
            let mut cfg = RunConfig::new(out_path(&s, "bench_out"));
            cfg.pipeline = s.pipeline();
            if let Some(b) = s.bases.clone().or(s.basis.map(|b| vec![b])) {
                cfg.bases = b;
            }
            cfg.ratios = s
                .ratios
                .clone()
                .or(s.ratio.map(|r| vec![r]))
                .unwrap_or_else(|| STANDARD_RATIOS.to_vec());
            cfg.seeds = s.seeds.clone().or(s.seed.map(|v| vec![v])).unwrap_or_else(|| vec![1]);
            cfg.record_timing = !s.no_timing.unwrap_or(false);
            cfg.clamp_noise = !s.no_clamp.unwrap_or(false);
            cfg.save_images = !no_images;
            let outcome = if synthetic {
                if !inputs.is_empty() {
                    return Err(Error::InvalidArgument("--synthetic takes no input files".into()));
                }
                run_benchmark_images(&cfg, &synthetic::substitute_set(144))?
            } else {
                run_benchmark(&cfg, &inputs)?
            };
            for r in &outcome.rows {
                println!(
                    "{:<12} {:<11} ratio {:.2} seed {:<3} PSNR {:>8.4}  SSIM {:.4}  atoms {:.3}",
                    r.image_name,
                    r.basis.label(),
                    r.noise_ratio,
                    r.seed,
                    r.psnr_db,
                    r.ssim,
                    r.mean_selected
                );
            }
            println!("wrote {}", outcome.csv_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

