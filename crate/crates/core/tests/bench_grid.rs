use std::fs;
use std::path::PathBuf;

use moment_cs::bench::{run_benchmark, RunConfig, CSV_HEADER};
use moment_cs::io::{encode_pgm, load_image};
use moment_cs::metrics::psnr;
use moment_cs::noise::{add_gaussian_noise, NoiseSpec};
use moment_cs::Denoiser;

fn data(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect()
}

#[test]
fn fixtures_are_144_square_graymaps() {
    for name in ["camera", "astronaut", "coffee", "chelsea", "coins"] {
        let img = load_image(data(&format!("{name}.pgm"))).unwrap();
        assert_eq!((img.width(), img.height()), (144, 144), "{name}");
        let lo = img.pixels().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = img.pixels().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo > 100.0, "{name} has too little contrast");
    }
}

#[test]
fn every_basis_sees_the_same_noisy_image() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(dir.path());
    cfg.pipeline.stride = 6;
    cfg.ratios = vec![0.2];
    cfg.seeds = vec![11];
    cfg.record_timing = false;
    let out = run_benchmark(&cfg, &[data("coins.pgm")]).unwrap();

    let csv = fs::read_to_string(&out.csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 3);

    let clean = load_image(data("coins.pgm")).unwrap();
    let expected = add_gaussian_noise(&clean, &NoiseSpec::new(0.2, 11).unwrap());
    let saved = fs::read(dir.path().join("coins_noisy_r0.20_s11.pgm")).unwrap();
    assert_eq!(saved, encode_pgm(&expected));

    for row in &out.rows {
        let den = Denoiser::new(cfg.pipeline.clone().with_basis(row.basis)).unwrap();
        let (img, stats) = den.denoise(&expected, 0.2 * 255.0).unwrap();
        assert_eq!(stats.mean_selected, row.mean_selected);
        assert_eq!(psnr(&clean, &img, 255.0).unwrap(), row.psnr_db);
    }
}
