use moment_cs::dictionary::build_dictionary;
use moment_cs::image::GrayImage;
use moment_cs::io::{decode_pgm, encode_pgm};
use moment_cs::metrics::{psnr, ssim, SsimConfig};
use moment_cs::noise::{add_gaussian_noise, NoiseSpec};
use moment_cs::omp::{omp_encode, reconstruct, Pursuit, StoppingRule};
use moment_cs::pipeline::{aggregate_patches, extract_patches};
use moment_cs::{BasisKind, Dictionary};
use proptest::prelude::*;
use std::path::Path;

fn kind_strategy() -> impl Strategy<Value = BasisKind> {
    prop_oneof![
        Just(BasisKind::Tchebichef),
        (0.05f64..0.95).prop_map(|p| BasisKind::Krawtchouk { p }),
        Just(BasisKind::Dct),
    ]
}

fn image_strategy(w: usize, h: usize) -> impl Strategy<Value = GrayImage> {
    prop::collection::vec(0u8..=255, w * h)
        .prop_map(move |v| GrayImage::new(w, h, v.into_iter().map(f64::from).collect()).unwrap())
}

fn random_dictionary(dim: usize, atoms: usize, seed: &[f64]) -> Dictionary {
    let cols: Vec<Vec<f64>> = (0..atoms)
        .map(|a| (0..dim).map(|i| seed[(a * dim + i) % seed.len()] + 0.01 * (a as f64 - i as f64)).collect())
        .collect();
    Dictionary::from_columns(dim, &cols).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_never_grows(
        kind in kind_strategy(),
        target in prop::collection::vec(-100.0f64..100.0, 36),
    ) {
        let dict = build_dictionary(kind, 6, 0.4, 0.6).unwrap();
        let mut p = Pursuit::new(&dict, &target).unwrap();
        let mut last = p.residual_norm();
        while p.step().is_some() {
            let now = p.residual_norm();
            prop_assert!(now <= last + 1e-9, "{} -> {}", last, now);
            last = now;
        }
    }

    #[test]
    fn residual_is_orthogonal_to_selection_on_redundant_dictionaries(
        seed in prop::collection::vec(-1.0f64..1.0, 97),
        target in prop::collection::vec(-5.0f64..5.0, 10),
        k in 1usize..8,
    ) {
        let dict = random_dictionary(10, 25, &seed);
        let code = omp_encode(&dict, &target, &StoppingRule::new(0.0, k)).unwrap();
        let approx = reconstruct(&dict, &code).unwrap();
        let resid: Vec<f64> = target.iter().zip(&approx).map(|(t, a)| t - a).collect();
        for &(idx, _) in &code.entries {
            let c: f64 = dict.atom(idx).iter().zip(&resid).map(|(a, r)| a * r).sum();
            prop_assert!(c.abs() < 1e-8, "atom {} correlation {}", idx, c);
        }
        let norm = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
        prop_assert!((norm - code.residual_norm).abs() < 1e-8);
    }

    #[test]
    fn metrics_are_symmetric(a in image_strategy(12, 10), b in image_strategy(12, 10)) {
        let p1 = psnr(&a, &b, 255.0).unwrap();
        let p2 = psnr(&b, &a, 255.0).unwrap();
        prop_assert!(p1 == p2 || (p1 - p2).abs() < 1e-12);
        let cfg = SsimConfig::default();
        let s1 = ssim(&a, &b, &cfg).unwrap();
        let s2 = ssim(&b, &a, &cfg).unwrap();
        prop_assert!((s1 - s2).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s1));
        prop_assert!((ssim(&a, &a, &cfg).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_roundtrip(img in image_strategy(7, 5)) {
        let back = decode_pgm(&encode_pgm(&img), Path::new("mem")).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn patch_split_and_merge_is_identity(
        img in image_strategy(17, 13),
        size in 2usize..8,
        stride_frac in 0.0f64..1.0,
    ) {
        let stride = 1 + ((size - 1) as f64 * stride_frac) as usize;
        let patches = extract_patches(&img, size, stride).unwrap();
        let back = aggregate_patches(&patches, 17, 13).unwrap();
        for (x, y) in back.pixels().iter().zip(img.pixels()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_is_reproducible(seed in any::<u64>(), ratio in 0.0f64..=1.0) {
        let img = GrayImage::filled(9, 9, 100.0).unwrap();
        let spec = NoiseSpec::new(ratio, seed).unwrap();
        let a = add_gaussian_noise(&img, &spec);
        let b = add_gaussian_noise(&img, &spec);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.pixels().iter().all(|v| (0.0..=255.0).contains(v)));
    }
}
